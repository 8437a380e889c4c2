"""Hadamard code: encoder, decoder, membership tester, BLR tester, self-corrector.

Positions of a length-``2**k`` word are integers ``j``; position ``j`` holds
``<j, s>`` where ``j`` is read as a ``k``-bit vector (index 0 most
significant). Words are :class:`~qiop.f2core.BitVec` values or query oracles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import DimensionError, InvalidInput
from .f2core import BitMatrix, BitVec, parity
from .qsim import DiagonalObservable, RegisterLayout, SparseState, apply_classical

BLR_QUERIES = 3
SELF_CORRECT_QUERIES = 2


class Oracle(Protocol):
    size: int

    def query(self, pos: int) -> int: ...


class TableOracle:
    """Oracle backed by a packed word; position 0 is the most significant bit."""

    def __init__(self, word: BitVec):
        self.word = word
        self.size = word.n

    def query(self, pos: int) -> int:
        return (self.word.val >> (self.size - 1 - pos)) & 1


class FnOracle:
    def __init__(self, size: int, fn: Callable[[int], int]):
        self.size = size
        self.fn = fn

    def query(self, pos: int) -> int:
        return self.fn(pos)


@dataclass
class CountingOracle:
    """Wraps an oracle and logs ``(name, pos, bit)`` for every read."""

    inner: Oracle
    name: str
    log: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.inner.size

    def query(self, pos: int) -> int:
        b = self.inner.query(pos)
        self.log.append((self.name, pos, b))
        return b


def as_oracle(w) -> Oracle:
    return TableOracle(w) if isinstance(w, BitVec) else w


def log2_exact(n: int) -> int:
    k = n.bit_length() - 1
    if n <= 0 or (1 << k) != n:
        raise InvalidInput(f"length {n} is not a power of two")
    return k


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (length a power of two)."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[-1]
    h = 1
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x, y = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :], a[..., 1, :] = x + y, x - y
        a = a.reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


def word_bits(w: BitVec) -> np.ndarray:
    """Bits of ``w`` as a uint8 array, position 0 first."""
    if w.n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(w.val.to_bytes((w.n + 7) // 8, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[-w.n:] if w.n % 8 else np.unpackbits(raw)


def bits_word(bits: np.ndarray) -> BitVec:
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[0]
    pad = (-n) % 8
    packed = np.packbits(np.concatenate([np.zeros(pad, np.uint8), bits]))
    return BitVec(n, int.from_bytes(packed.tobytes(), "big") if n else 0)


@dataclass(frozen=True)
class TesterParams:
    __test__ = False

    q_L: int = BLR_QUERIES
    q_S: int = SELF_CORRECT_QUERIES
    repetitions: int = 1
    kappa: float = 0.25
    kappa_prime: float = 2.0
    eps: float = 0.0009

    def __post_init__(self):
        if min(self.q_L, self.q_S, self.repetitions) < 1:
            raise InvalidInput("query counts and repetitions must be positive")
        if not 0 < self.eps < 0.001:
            raise InvalidInput("eps must lie in (0, 0.001)")


class HadamardCode:
    def __init__(self, k: int):
        if k < 0:
            raise InvalidInput("negative message length")
        self.k = k
        self.n = 1 << k

    @property
    def generator(self) -> BitMatrix:
        return BitMatrix.hadamard_generator(self.k)

    def encode_int(self, s: int) -> int:
        """Packed codeword of the packed message ``s``."""
        out = 0
        for j in range(self.n):
            out = (out << 1) | parity(j & s)
        return out

    def encode(self, s: BitVec) -> BitVec:
        if s.n != self.k:
            raise DimensionError(f"message length {s.n}, expected {self.k}")
        if self.k <= 16:
            j = np.arange(self.n, dtype=np.int64)
            bits = np.bitwise_count(j & s.val) & 1 if hasattr(np, "bitwise_count") else \
                np.array([parity(int(x) & s.val) for x in j], dtype=np.uint8)
            return bits_word(bits.astype(np.uint8))
        return BitVec(self.n, self.encode_int(s.val))

    def agreements(self, w: BitVec) -> np.ndarray:
        """Agreement count of ``w`` with every codeword, indexed by packed message."""
        if w.n != self.n:
            raise DimensionError(f"word length {w.n}, expected {self.n}")
        signs = 1.0 - 2.0 * word_bits(w)
        return (self.n + fwht(signs)) / 2

    def decode(self, w: BitVec) -> BitVec:
        """Nearest codeword's message; ties go to the smallest message."""
        log2_exact(w.n)
        agr = self.agreements(w)
        return BitVec(self.k, int(np.argmax(agr)))

    def distance(self, w: BitVec) -> int:
        return int(self.n - np.max(self.agreements(w)))

    def tester_T(self, w: BitVec) -> int:
        return int(self.encode(self.decode(w)) == w)


def blr_positions(k: int, r: int | tuple[int, int]) -> tuple[int, int, int]:
    if isinstance(r, tuple):
        x, y = r
    else:
        x, y = r >> k, r & ((1 << k) - 1)
    return x, y, x ^ y


def blr_test(w, r: int | tuple[int, int]) -> int:
    """Accept (1) iff ``w(x) xor w(y) == w(x xor y)``; exactly three queries."""
    w = as_oracle(w)
    k = log2_exact(w.size)
    x, y, xy = blr_positions(k, r)
    return int(w.query(x) ^ w.query(y) == w.query(xy))


def self_correct(w, p: int, r: int) -> int:
    """``w(x) xor w(x xor p)`` with ``x = r``; two queries."""
    w = as_oracle(w)
    if not 0 <= p < w.size or not 0 <= r < w.size:
        raise DimensionError("position or randomness out of range")
    return w.query(r) ^ w.query(r ^ p)


def blr_acceptance(w: BitVec) -> float:
    """Exact acceptance over all ``(x, y)`` via the Fourier identity ``1/2 + 1/2 sum f^3``."""
    n = w.n
    signs = 1.0 - 2.0 * word_bits(w)
    hat = fwht(signs) / n
    return float(0.5 + 0.5 * np.sum(hat ** 3))


def blr_acceptance_enumerated(w: BitVec) -> float:
    """Exact acceptance by reading every ``(x, y)`` pair."""
    b = word_bits(w).astype(np.int64)
    n = w.n
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    ok = (b[x] ^ b[y]) == b[x ^ y]
    return float(ok.mean())


def self_correct_flip_probs(w: BitVec) -> np.ndarray:
    """``Pr_x[w(x) != w(x xor q)]`` for every shift ``q`` (autocorrelation)."""
    n = w.n
    signs = 1.0 - 2.0 * word_bits(w)
    hat = fwht(signs)
    corr = fwht(hat * hat) / (n * n)
    return (1.0 - corr) / 2


def self_correct_error(w: BitVec, p: int, truth: int) -> float:
    """Exact probability over ``x`` that self-correction at ``p`` differs from ``truth``."""
    b = word_bits(w).astype(np.int64)
    xs = np.arange(w.n)
    return float(np.mean((b[xs] ^ b[xs ^ p]) != truth))


# ---------------------------------------------------------------------------
# Coherent liftings on registers


def _reg_checks(layout: RegisterLayout, names: Sequence[str]):
    for nm in names:
        if nm not in layout.offsets:
            raise DimensionError(f"missing register {nm}")


def lift_decode(state: SparseState, code: HadamardCode, D: str = "D", R: str = "R") -> SparseState:
    """``|a>_D |w>_R -> |a xor decode(w)>_D |w>_R``."""
    lay = state.layout
    _reg_checks(lay, [D, R])
    if lay.width_of(D) != code.k or lay.width_of(R) != code.n:
        raise DimensionError("register widths do not match the code")
    cache: dict[int, int] = {}

    def f(key: int) -> int:
        w = lay.get(key, R)
        if w not in cache:
            cache[w] = code.decode(BitVec(code.n, w)).val
        return lay.put(key, D, lay.get(key, D) ^ cache[w])

    return apply_classical(state, f)


def lift_blr(state: SparseState, code: HadamardCode, L: str = "L", R: str = "R", T: str = "T_L") -> SparseState:
    """``|a>_L |w>_R |r>_T -> |a xor blr(w; r)>_L |w>_R |r>_T``."""
    lay = state.layout
    _reg_checks(lay, [L, R, T])
    if lay.width_of(L) != 1 or lay.width_of(R) != code.n or lay.width_of(T) != 2 * code.k:
        raise DimensionError("register widths do not match the code")

    def f(key: int) -> int:
        w = BitVec(code.n, lay.get(key, R))
        return lay.put(key, L, lay.get(key, L) ^ blr_test(w, lay.get(key, T)))

    return apply_classical(state, f)


def lift_selfcorrect(state: SparseState, code: HadamardCode, p: int, S: str = "S", R: str = "R",
                     T: str = "T_S") -> SparseState:
    """``|a>_S |w>_R |r>_T -> |a xor S^w(p; r)>_S |w>_R |r>_T``."""
    lay = state.layout
    _reg_checks(lay, [S, R, T])
    if lay.width_of(S) != 1 or lay.width_of(R) != code.n or lay.width_of(T) != code.k:
        raise DimensionError("register widths do not match the code")
    shift = lay.shift(R)
    n = code.n

    def f(key: int) -> int:
        x = lay.get(key, T)
        bit = ((key >> (shift + n - 1 - x)) ^ (key >> (shift + n - 1 - (x ^ p)))) & 1
        return lay.put(key, S, lay.get(key, S) ^ bit)

    return apply_classical(state, f)


def read_observable(code: HadamardCode, p: int, layout: RegisterLayout, R: str = "R",
                    r: int | None = None, S: str | None = None, T: str = "T_S") -> DiagonalObservable:
    """Self-corrected read-out observable of position ``p``.

    The lifted map XORs a bit into ``S`` and is a basis permutation, so
    conjugating ``Z_S`` by it is diagonal: label ``= a xor S^w(p; r)`` where
    ``a`` is the content of ``S`` (taken as 0 if ``S`` is None). With ``r``
    given the randomness is classical; otherwise it is read from ``T``.
    """
    if not 0 <= p < code.n:
        raise DimensionError("position out of range")
    shift = layout.shift(R)
    n = code.n
    if layout.width_of(R) != n:
        raise DimensionError("register width does not match the code")
    s_shift = layout.shift(S) if S is not None else None
    t_get = (lambda key: layout.get(key, T)) if r is None else None

    def fn(key: int) -> int:
        x = r if t_get is None else t_get(key)
        bit = ((key >> (shift + n - 1 - x)) ^ (key >> (shift + n - 1 - (x ^ p)))) & 1
        if s_shift is not None:
            bit ^= (key >> s_shift) & 1
        return bit

    return DiagonalObservable(fn)


def blr_observable(code: HadamardCode, layout: RegisterLayout, x: int, y: int, R: str = "R") -> DiagonalObservable:
    """Measuring ``Z_L`` after the lifted BLR test with classical ``(x, y)``: label 1 means accept."""
    shift = layout.shift(R)
    n = code.n

    def fn(key: int) -> int:
        b = (key >> (shift + n - 1 - x)) ^ (key >> (shift + n - 1 - y)) ^ (key >> (shift + n - 1 - (x ^ y)))
        return 1 - (b & 1)

    return DiagonalObservable(fn)
