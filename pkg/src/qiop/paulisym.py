"""Pauli group in symplectic form with exact Z4 phases.

A :class:`PauliOp` is ``i**e X(x) Z(z)``; qubit 0 is the leftmost tensor
factor, matching :mod:`qiop.f2core` bit order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DecompositionError, DimensionError, InvalidInput, ResourceError
from .f2core import BitVec, parity

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PHASE = (1, 1j, -1, -1j)

MAX_MATRIX_QUBITS = 12
DECOMPOSE_TOL = 1e-8


@dataclass(frozen=True)
class PauliOp:
    n: int
    e: int
    x: int
    z: int

    def __post_init__(self):
        object.__setattr__(self, "e", self.e % 4)
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask or self.x < 0 or self.z < 0:
            raise InvalidInput("x/z wider than n")

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_bits(cls, e: int, x: BitVec | str, z: BitVec | str) -> "PauliOp":
        x = BitVec.from_str(x) if isinstance(x, str) else x
        z = BitVec.from_str(z) if isinstance(z, str) else z
        if x.n != z.n:
            raise DimensionError("x and z lengths differ")
        return cls(x.n, e, x.val, z.val)

    @classmethod
    def from_label(cls, label: str) -> "PauliOp":
        """Parse strings like ``"-XZY"`` or ``"+iIZ"`` (Y means the Hermitian Pauli Y)."""
        sign = 0
        if label.startswith("-"):
            sign, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        if label.startswith("i"):
            sign, label = sign + 1, label[1:]
        p = cls.identity(len(label))
        n = len(label)
        for q, ch in enumerate(label):
            bit = 1 << (n - 1 - q)
            if ch == "X":
                p = pauli_mul(p, cls(n, 0, bit, 0))
            elif ch == "Z":
                p = pauli_mul(p, cls(n, 0, 0, bit))
            elif ch == "Y":
                p = pauli_mul(p, cls(n, 1, bit, bit))
            elif ch != "I":
                raise InvalidInput(f"bad Pauli label character {ch!r}")
        return cls(n, p.e + sign, p.x, p.z)

    @property
    def xvec(self) -> BitVec:
        return BitVec(self.n, self.x)

    @property
    def zvec(self) -> BitVec:
        return BitVec(self.n, self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    def is_hermitian(self) -> bool:
        return self.e % 2 == parity(self.x & self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.e == 0

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return pauli_mul(self, other)

    def __neg__(self) -> "PauliOp":
        return PauliOp(self.n, self.e + 2, self.x, self.z)

    def dagger(self) -> "PauliOp":
        # (i^e X Z)^dagger = i^-e Z X = i^-e (-1)^{x.z} X Z
        return PauliOp(self.n, -self.e + 2 * parity(self.x & self.z), self.x, self.z)

    def tensor(self, other: "PauliOp") -> "PauliOp":
        return PauliOp(self.n + other.n, self.e + other.e,
                       (self.x << other.n) | other.x, (self.z << other.n) | other.z)

    def embed(self, n: int, positions: Sequence[int]) -> "PauliOp":
        """Place this operator on ``positions`` of an ``n``-qubit register."""
        if len(positions) != self.n:
            raise DimensionError("position count differs from operator size")
        x = z = 0
        for k, q in enumerate(positions):
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range")
            shift = self.n - 1 - k
            x |= ((self.x >> shift) & 1) << (n - 1 - q)
            z |= ((self.z >> shift) & 1) << (n - 1 - q)
        return PauliOp(n, self.e, x, z)

    def restrict(self, positions: Sequence[int]) -> "PauliOp":
        """Operator on ``positions`` only; the caller guarantees the support lies inside."""
        x = z = 0
        for q in positions:
            shift = self.n - 1 - q
            x = (x << 1) | ((self.x >> shift) & 1)
            z = (z << 1) | ((self.z >> shift) & 1)
        return PauliOp(len(positions), self.e, x, z)

    def label(self) -> str:
        d, a, b, c = to_xzy(self) if self.is_hermitian() else (None, None, None, None)
        if d is None:
            return f"i^{self.e} X({self.xvec}) Z({self.zvec})"
        chars = []
        for q in range(self.n):
            bit = self.n - 1 - q
            chars.append("X" if (a.val >> bit) & 1 else "Z" if (b.val >> bit) & 1
                         else "Y" if (c.val >> bit) & 1 else "I")
        return ("-" if d else "+") + "".join(chars)

    def to_json(self) -> dict:
        return {"n": self.n, "e": self.e, "x": str(self.xvec), "z": str(self.zvec)}

    @classmethod
    def from_json(cls, obj: dict) -> "PauliOp":
        p = cls.from_bits(obj["e"], obj["x"], obj["z"])
        if p.n != obj["n"]:
            raise DimensionError("n field disagrees with bit strings")
        return p


def pauli_mul(P: PauliOp, Q: PauliOp) -> PauliOp:
    """``P Q`` using ``Z(z) X(x) = (-1)^{z.x} X(x) Z(z)``."""
    if P.n != Q.n:
        raise DimensionError(f"size mismatch: {P.n} vs {Q.n}")
    return PauliOp(P.n, P.e + Q.e + 2 * parity(P.z & Q.x), P.x ^ Q.x, P.z ^ Q.z)


def commutation_sign(P: PauliOp, Q: PauliOp) -> int:
    if P.n != Q.n:
        raise DimensionError(f"size mismatch: {P.n} vs {Q.n}")
    return -1 if parity(P.x & Q.z) ^ parity(P.z & Q.x) else 1


def from_xzy(d: int, a: BitVec, b: BitVec, c: BitVec) -> PauliOp:
    """``(-1)^d X(a) Z(b) Y(c)`` for pairwise disjoint ``a, b, c``."""
    if not (a.n == b.n == c.n):
        raise DimensionError("a, b, c lengths differ")
    if (a.val & b.val) or (b.val & c.val) or (c.val & a.val):
        raise InvalidInput("supports of a, b, c overlap")
    return PauliOp(a.n, 2 * d + c.popcount(), a.val ^ c.val, b.val ^ c.val)


def to_xzy(P: PauliOp) -> tuple[int, BitVec, BitVec, BitVec]:
    if not P.is_hermitian():
        raise InvalidInput("to_xzy needs a Hermitian operator")
    c = P.x & P.z
    a = P.x & ~P.z
    b = P.z & ~P.x
    d = ((P.e - c.bit_count()) % 4) // 2
    return d, BitVec(P.n, a), BitVec(P.n, b), BitVec(P.n, c)


def pauli_matrix(P: PauliOp) -> np.ndarray:
    if P.n > MAX_MATRIX_QUBITS:
        raise ResourceError(f"dense Pauli matrix limited to {MAX_MATRIX_QUBITS} qubits")
    m = np.array([[_PHASE[P.e]]], dtype=complex)
    for q in range(P.n):
        shift = P.n - 1 - q
        f = _I2
        if (P.x >> shift) & 1:
            f = _X
        if (P.z >> shift) & 1:
            f = f @ _Z
        m = np.kron(m, f)
    return m


@dataclass(frozen=True, eq=False)
class CliffordGate:
    """A dense unitary on ``support`` (ordered qubit indices), at most 5 qubits."""

    support: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(q) for q in self.support))
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        w = len(self.support)
        if w > 5:
            raise InvalidInput("Clifford arity above 5")
        if len(set(self.support)) != w:
            raise InvalidInput("repeated qubit in support")
        if m.shape != (1 << w, 1 << w):
            raise DimensionError("matrix shape does not match support")
        if np.max(np.abs(m.conj().T @ m - np.eye(1 << w))) > 1e-10:
            raise InvalidInput("matrix is not unitary")

    @property
    def w(self) -> int:
        return len(self.support)

    def check_clifford(self) -> None:
        """Raise :class:`DecompositionError` unless generators map to Paulis."""
        for q in range(self.w):
            for gen in (PauliOp(self.w, 0, 1 << (self.w - 1 - q), 0),
                        PauliOp(self.w, 0, 0, 1 << (self.w - 1 - q))):
                decompose(self.matrix.conj().T @ pauli_matrix(gen) @ self.matrix)

    def to_json(self) -> dict:
        return {"support": list(self.support),
                "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix]}

    @classmethod
    def from_json(cls, obj: dict) -> "CliffordGate":
        raw = np.asarray(obj["matrix"], dtype=float)
        return cls(tuple(obj["support"]), raw[..., 0] + 1j * raw[..., 1])


@lru_cache(maxsize=None)
def _basis(w: int) -> tuple[tuple[PauliOp, np.ndarray], ...]:
    out = []
    for x, z in itertools.product(range(1 << w), repeat=2):
        p = PauliOp(w, 0, x, z)
        out.append((p, pauli_matrix(p)))
    return tuple(out)


def decompose(M: np.ndarray) -> PauliOp:
    """Find ``i^e X(x)Z(z)`` equal to ``M`` entrywise within the decomposition tolerance."""
    dim = M.shape[0]
    w = dim.bit_length() - 1
    if M.shape != (dim, dim) or (1 << w) != dim:
        raise DimensionError("matrix is not 2^w square")
    for p, pm in _basis(w):
        coeff = np.vdot(pm, M) / dim
        if abs(abs(coeff) - 1) > DECOMPOSE_TOL:
            continue
        for e in range(4):
            if abs(coeff - _PHASE[e]) <= DECOMPOSE_TOL:
                cand = PauliOp(w, e, p.x, p.z)
                if np.max(np.abs(_PHASE[e] * pm - M)) <= DECOMPOSE_TOL:
                    return cand
    raise DecompositionError("matrix is not proportional to a Pauli with Z4 phase")


def clifford_conjugate(C: CliffordGate, P: PauliOp) -> PauliOp:
    """Return ``C^dagger P C`` as a Pauli on the full register of ``P``."""
    inside = 0
    for q in C.support:
        if not 0 <= q < P.n:
            raise DimensionError(f"support qubit {q} outside {P.n}-qubit register")
        inside |= 1 << (P.n - 1 - q)
    if P.support & ~inside:
        raise InvalidInput("Pauli not supported inside the Clifford's support")
    local = P.restrict(C.support)
    conj = decompose(C.matrix.conj().T @ pauli_matrix(local) @ C.matrix)
    return conj.embed(P.n, C.support)


def single_z(w: int, j: int) -> PauliOp:
    return PauliOp(w, 0, 0, 1 << (w - 1 - j))
