"""Vectors and matrices over GF(2).

Bits are stored packed in a Python ``int``. Index 0 is the leftmost printed
bit, which is the *most significant* bit of the packed integer. So the
string ``"100"`` packs to ``0b100 == 4``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DimensionError, InvalidInput


def parity(v: int) -> int:
    return v.bit_count() & 1


@dataclass(frozen=True)
class BitVec:
    """Length-tagged GF(2) vector; ``val`` packs bit ``i`` at weight ``2**(n-1-i)``."""

    n: int
    val: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput("negative length")
        if self.val < 0 or self.val >> self.n:
            raise InvalidInput(f"value {self.val} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, s: str) -> "BitVec":
        if any(ch not in "01" for ch in s):
            raise InvalidInput(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2) if s else 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVec":
        bits = list(bits)
        val = 0
        for b in bits:
            if b not in (0, 1):
                raise InvalidInput(f"bit out of range: {b}")
            val = (val << 1) | b
        return cls(len(bits), val)

    @classmethod
    def zeros(cls, n: int) -> "BitVec":
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, i: int) -> "BitVec":
        if not 0 <= i < n:
            raise DimensionError(f"index {i} out of range for length {n}")
        return cls(n, 1 << (n - 1 - i))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.n
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.val >> (self.n - 1 - i)) & 1

    def __iter__(self):
        return iter(self.bits)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.val >> (self.n - 1 - i)) & 1 for i in range(self.n))

    def __str__(self) -> str:
        return format(self.val, f"0{self.n}b") if self.n else ""

    def _check(self, other: "BitVec"):
        if self.n != other.n:
            raise DimensionError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: "BitVec") -> "BitVec":
        self._check(other)
        return BitVec(self.n, self.val ^ other.val)

    def __and__(self, other: "BitVec") -> "BitVec":
        self._check(other)
        return BitVec(self.n, self.val & other.val)

    def __or__(self, other: "BitVec") -> "BitVec":
        self._check(other)
        return BitVec(self.n, self.val | other.val)

    def __invert__(self) -> "BitVec":
        return BitVec(self.n, ~self.val & ((1 << self.n) - 1))

    def concat(self, other: "BitVec") -> "BitVec":
        return BitVec(self.n + other.n, (self.val << other.n) | other.val)

    def popcount(self) -> int:
        return self.val.bit_count()

    def inner(self, other: "BitVec") -> int:
        self._check(other)
        return parity(self.val & other.val)

    def slice(self, start: int, stop: int) -> "BitVec":
        """Bits ``start..stop-1`` as a new vector."""
        if not 0 <= start <= stop <= self.n:
            raise DimensionError("slice out of range")
        width = stop - start
        return BitVec(width, (self.val >> (self.n - stop)) & ((1 << width) - 1))


def inner(u: BitVec, v: BitVec) -> int:
    return u.inner(v)


def xor(u: BitVec, v: BitVec) -> BitVec:
    return u ^ v


def and_(u: BitVec, v: BitVec) -> BitVec:
    return u & v


def popcount(u: BitVec) -> int:
    return u.popcount()


def hamming(u: BitVec, v: BitVec) -> int:
    return (u ^ v).popcount()


@dataclass(frozen=True)
class BitMatrix:
    """Row-major GF(2) matrix; each row is a packed integer of width ``cols``."""

    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        if len(self.data) != self.rows:
            raise DimensionError("row count does not match data")
        for r in self.data:
            if r < 0 or r >> self.cols:
                raise InvalidInput("row wider than column count")

    @classmethod
    def from_rows(cls, rows: Sequence[BitVec | str]) -> "BitMatrix":
        vecs = [BitVec.from_str(r) if isinstance(r, str) else r for r in rows]
        if not vecs:
            return cls(0, 0, ())
        cols = vecs[0].n
        if any(v.n != cols for v in vecs):
            raise DimensionError("ragged rows")
        return cls(len(vecs), cols, tuple(v.val for v in vecs))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << (n - 1 - i) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def hadamard_generator(cls, k: int) -> "BitMatrix":
        """The ``2**k x k`` matrix whose row ``i`` is the binary expansion of ``i``."""
        return cls(1 << k, k, tuple(range(1 << k)))

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.data[i])

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> (self.cols - 1 - j)) & 1

    def mat_vec(self, s: BitVec) -> BitVec:
        if s.n != self.cols:
            raise DimensionError(f"matrix has {self.cols} columns, vector has length {s.n}")
        out = 0
        for r in self.data:
            out = (out << 1) | parity(r & s.val)
        return BitVec(self.rows, out)

    def rank(self) -> int:
        return gf2_rank(self.data)


def mat_vec(G: BitMatrix, s: BitVec) -> BitVec:
    return G.mat_vec(s)


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank of a set of packed GF(2) row vectors (XOR basis elimination)."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def tensor(u: int, v: int, nv: int) -> int:
    """Packed ``u ⊗ v``: entry ``(i, j)`` at flat index ``i*nv + j`` equals ``u_i v_j``."""
    out = 0
    nu = u.bit_length()
    for i in range(nu):
        if (u >> i) & 1:
            out |= v << (i * nv)
    return out
