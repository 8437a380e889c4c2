"""Clifford-Hamiltonians: instances, spectra, gap amplification and masked Pauli products.

``H = (1/m) sum_i (C_i^dagger |0..0><0..0| C_i)_{S_i} ⊗ I``. Each term is the
product over its sites ``j`` of ``(I + O_{i,j})/2`` with
``O_{i,j} = C_i^dagger Z_j C_i``, a Hermitian Pauli. A copy of the amplified
Hamiltonian uses :data:`SLOTS` slots per term; slots beyond ``|S_i|`` hold
the identity.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, InvalidInput, ResourceError
from .f2core import BitVec
from .paulisym import CliffordGate, PauliOp, clifford_conjugate, pauli_matrix, single_z
from .qsim import CNOT_GATE, H_GATE, S_GATE

SLOTS = 5
MAX_DENSE_QUBITS = 10


@dataclass(frozen=True, eq=False)
class CliffordHamiltonian:
    n: int
    terms: tuple[CliffordGate, ...]
    known_lambda_min: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise InvalidInput("a Clifford-Hamiltonian needs at least one term")
        for C in self.terms:
            if any(not 0 <= q < self.n for q in C.support):
                raise DimensionError("term support outside the register")
            C.check_clifford()

    @property
    def m(self) -> int:
        return len(self.terms)

    def term_projector(self, i: int) -> np.ndarray:
        """Dense ``C_i^dagger |0><0| C_i`` on the full register."""
        P = np.eye(1 << self.n, dtype=complex)
        for O in term_paulis(self, i):
            P = P @ (np.eye(1 << self.n) + pauli_matrix(O)) / 2
        return P

    def matrix(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS:
            raise ResourceError(f"dense Hamiltonian limited to {MAX_DENSE_QUBITS} qubits")
        return sum(self.term_projector(i) for i in range(self.m)) / self.m

    @cached_property
    def paulis(self) -> tuple[tuple[PauliOp, ...], ...]:
        return tuple(tuple(clifford_conjugate(C, single_z(self.n, q)) for q in C.support) for C in self.terms)

    @cached_property
    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix())

    def to_json(self) -> dict:
        out = {"n": self.n, "terms": [{"support": list(C.support), "clifford": C.to_json()["matrix"]}
                                      for C in self.terms]}
        if self.known_lambda_min is not None:
            out["known_lambda_min"] = self.known_lambda_min
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CliffordHamiltonian":
        terms = tuple(CliffordGate.from_json({"support": t["support"], "matrix": t["clifford"]})
                      for t in obj["terms"])
        return cls(int(obj["n"]), terms, obj.get("known_lambda_min"))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def term_paulis(H: CliffordHamiltonian, i: int) -> list[PauliOp]:
    """``[C_i^dagger Z_j C_i]`` for the sites ``j`` of term ``i``, in support order."""
    if not 0 <= i < H.m:
        raise InvalidInput(f"term index {i} out of range")
    return list(H.paulis[i])


def slot_paulis(H: CliffordHamiltonian, i: int) -> list[PauliOp]:
    """The :data:`SLOTS` observables of term ``i``; unused slots are the identity."""
    ops = term_paulis(H, i)
    if len(ops) > SLOTS:
        raise InvalidInput(f"term acts on more than {SLOTS} qubits")
    return ops + [PauliOp.identity(H.n)] * (SLOTS - len(ops))


@dataclass(frozen=True)
class AmplifiedSample:
    N: int
    l: tuple[int, ...]
    t: BitVec

    def __post_init__(self):
        object.__setattr__(self, "l", tuple(self.l))
        if len(self.l) != self.N or self.t.n != SLOTS * self.N:
            raise DimensionError("sample widths do not match N")

    def slot(self, i: int, j: int) -> int:
        return self.t[SLOTS * i + j]


def masked_observable(H: CliffordHamiltonian, sample: AmplifiedSample) -> PauliOp:
    """``⊗_i prod_j O_{l_i, j}^{t_{i,j}}`` with the product taken in ascending ``j``."""
    out = None
    for i, li in enumerate(sample.l):
        if not 0 <= li < H.m:
            raise InvalidInput("term index out of range")
        P = PauliOp.identity(H.n)
        for j, O in enumerate(slot_paulis(H, li)):
            if sample.slot(i, j):
                P = P * O
        if not P.is_hermitian():
            raise AssertionError("commuting Hermitian Paulis produced a non-Hermitian product")
        out = P if out is None else out.tensor(P)
    return out


def exact_spectrum(H: CliffordHamiltonian) -> np.ndarray:
    return H.spectrum.copy()


def ground_state(H: CliffordHamiltonian) -> np.ndarray:
    vals, vecs = np.linalg.eigh(H.matrix())
    g = vecs[:, 0]
    k = int(np.argmax(np.abs(g) > 1e-9))
    g = g * (abs(g[k]) / g[k])
    return g / np.linalg.norm(g)


def amplified_extreme_from_spectrum(spectrum, N: int) -> float:
    """``lambda_max((1 - 2H)^{⊗N})``: the largest product of ``N`` eigenvalues of ``1 - 2H``.

    An optimal product only uses the two extreme eigenvalues, so it is the
    best of ``mu_min^j mu_max^(N-j)`` over ``j``.
    """
    if N < 1 or N % 2 == 0:
        raise InvalidInput("N must be a positive odd integer")
    mu = 1 - 2 * np.asarray(spectrum, dtype=float)
    lo, hi = float(mu.min()), float(mu.max())
    return max(lo ** j * hi ** (N - j) for j in range(N + 1))


def amplified_extreme(H: CliffordHamiltonian, N: int) -> float:
    return amplified_extreme_from_spectrum(H.spectrum, N)


def amplification_bounds(spectrum, N: int, a: float, b: float) -> dict:
    """Which of the gap-amplification bounds apply and whether they hold.

    ``yes`` applies when ``lambda_min <= a`` and asks ``value >= (1-2a)^N``;
    ``no`` applies when ``lambda_min >= b`` and asks ``value <= (1-2b)^N``.
    ``tight`` records whether the value equals ``(1 - 2 lambda_min)^N``.
    """
    lam = float(np.min(spectrum))
    val = amplified_extreme_from_spectrum(spectrum, N)
    out = {"lambda_min": lam, "value": val, "tight": abs(val - (1 - 2 * lam) ** N) <= 1e-8}
    if lam <= a:
        out["yes"] = val >= (1 - 2 * a) ** N - 1e-8
    if lam >= b:
        out["no"] = val <= (1 - 2 * b) ** N + 1e-8
    return out


# ---------------------------------------------------------------------------
# mu1 / mu2


def sample_mu(H: CliffordHamiltonian, N: int, which: str, rng: np.random.Generator) -> tuple[BitVec, BitVec]:
    """Draw ``(b + c [+ r], a + c)`` for uniform ``t, l`` (and ``r`` for ``mu2``)."""
    if which not in ("mu1", "mu2"):
        raise InvalidInput("which must be mu1 or mu2")
    l = tuple(int(x) for x in rng.integers(0, H.m, size=N))
    t = BitVec(SLOTS * N, int(rng.integers(0, 1 << (SLOTS * N))))
    P = masked_observable(H, AmplifiedSample(N, l, t))
    bpart, apart = P.z, P.x
    if which == "mu2":
        bpart ^= int(rng.integers(0, 1 << (N * H.n)))
    return BitVec(N * H.n, bpart), BitVec(N * H.n, apart)


def mu_distribution(H: CliffordHamiltonian, N: int, which: str = "mu1") -> dict[tuple[int, int], float]:
    """Exact law of :func:`sample_mu` as ``{(b_part, a_part): prob}``; unused slots are summed out."""
    w = N * H.n
    per_term = []
    for i in range(H.m):
        ops = term_paulis(H, i)
        counts: dict[tuple[int, int], float] = {}
        for mask in itertools.product((0, 1), repeat=len(ops)):
            P = PauliOp.identity(H.n)
            for bit, O in zip(mask, ops):
                if bit:
                    P = P * O
            key = (P.z, P.x)
            counts[key] = counts.get(key, 0.0) + 1.0 / (1 << len(ops))
        per_term.append(counts)
    dist: dict[tuple[int, int], float] = {(0, 0): 1.0}
    for _ in range(N):
        nxt: dict[tuple[int, int], float] = {}
        for (zb, xa), p in dist.items():
            for counts in per_term:
                for (z, x), q in counts.items():
                    key = ((zb << H.n) | z, (xa << H.n) | x)
                    nxt[key] = nxt.get(key, 0.0) + p * q / H.m
        dist = nxt
    if which == "mu1":
        return dist
    if which != "mu2":
        raise InvalidInput("which must be mu1 or mu2")
    out: dict[tuple[int, int], float] = {}
    for (zb, xa), p in dist.items():
        for r in range(1 << w):
            out[(zb ^ r, xa)] = out.get((zb ^ r, xa), 0.0) + p / (1 << w)
    return out


# ---------------------------------------------------------------------------
# Instances


def _embed_1q(U: np.ndarray, q: int, w: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(1 << q), U), np.eye(1 << (w - q - 1)))


def _cnot(c: int, t: int, w: int) -> np.ndarray:
    dim = 1 << w
    M = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        bit_c = (k >> (w - 1 - c)) & 1
        M[k ^ (bit_c << (w - 1 - t)), k] = 1
    return M


def random_clifford(w: int, rng: np.random.Generator, depth: int | None = None) -> np.ndarray:
    """Product of random H, S and CNOT gates on ``w`` qubits."""
    depth = 6 * w + 4 if depth is None else depth
    U = np.eye(1 << w, dtype=complex)
    for _ in range(depth):
        kind = int(rng.integers(3 if w > 1 else 2))
        if kind == 0:
            G = _embed_1q(H_GATE, int(rng.integers(w)), w)
        elif kind == 1:
            G = _embed_1q(S_GATE, int(rng.integers(w)), w)
        else:
            c, t = rng.choice(w, size=2, replace=False)
            G = _cnot(int(c), int(t), w)
        U = G @ U
    return U


def named_gate(name: str) -> np.ndarray:
    return {"I": np.eye(2, dtype=complex), "H": H_GATE, "S": S_GATE, "CNOT": CNOT_GATE,
            "X": np.array([[0, 1], [1, 0]], dtype=complex)}[name]


def term(support, U) -> CliffordGate:
    U = named_gate(U) if isinstance(U, str) else U
    return CliffordGate(tuple(support), U)


def random_instance(n: int, m: int, rng: np.random.Generator, max_arity: int = 3) -> CliffordHamiltonian:
    terms = []
    for _ in range(m):
        w = int(rng.integers(1, min(max_arity, n) + 1))
        S = tuple(int(q) for q in rng.choice(n, size=w, replace=False))
        terms.append(CliffordGate(S, random_clifford(w, rng)))
    return CliffordHamiltonian(n, tuple(terms))


def toy_instances(seed: int = 0, count: int = 12) -> list[CliffordHamiltonian]:
    """Fixed corpus: a few hand-built instances plus seeded random ones on at most 3 qubits."""
    out = [
        CliffordHamiltonian(1, (term([0], "I"),)),
        CliffordHamiltonian(1, (term([0], "I"), term([0], "X"))),
        CliffordHamiltonian(1, (term([0], "I"), term([0], "H"))),
        CliffordHamiltonian(2, (term([0], "X"), term([1], "H"), term([0, 1], "CNOT"))),
    ]
    rng = np.random.default_rng(seed)
    while len(out) < count:
        n = int(rng.integers(1, 4))
        out.append(random_instance(n, int(rng.integers(1, 4)), rng))
    return out


def _phase_key(U: np.ndarray) -> tuple:
    flat = U.flatten()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    V = U * (abs(flat[k]) / flat[k])
    return tuple(np.round(V.flatten(), 8))


def clifford_sweep(w: int, depth: int) -> list[np.ndarray]:
    """Distinct (up to global phase) products of at most ``depth`` H, S and CNOT gates on ``w`` qubits."""
    gens = [_embed_1q(H_GATE, q, w) for q in range(w)] + [_embed_1q(S_GATE, q, w) for q in range(w)]
    gens += [_cnot(c, t, w) for c in range(w) for t in range(w) if c != t]
    seen = {_phase_key(np.eye(1 << w)): np.eye(1 << w, dtype=complex)}
    frontier = list(seen.values())
    for _ in range(depth):
        nxt = []
        for U in frontier:
            for G in gens:
                V = G @ U
                k = _phase_key(V)
                if k not in seen:
                    seen[k] = V
                    nxt.append(V)
        frontier = nxt
    return list(seen.values())
