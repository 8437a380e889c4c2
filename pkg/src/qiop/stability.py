"""Gowers-Hatami diagnostics for approximate Pauli representations.

An :class:`ApproxRep` stores ``f(X(a) Z(b))`` for the ``4**n`` positive
elements; ``f(-x) = -f(x)`` holds by construction. The isometry follows the
stability proof: ``V u = sqrt(N / 2 d0) E_x f(x) u (x) rho(x)`` with the
``d0 x d0`` matrix ``rho(x)`` flattened row-major, so ``V`` maps ``C^d`` into
``C^d (x) C^{d0 * d0}`` and the representation there is
``g(x) = I_d (x) I_d0 (x) rho(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInput, NumericError, ResourceError
from .f2core import parity
from .paulisym import PauliOp, pauli_matrix
from .qubit_tests import (CanonicalProver, clean_form_apply, mqt_adversary, mqt_corpus_specs, mqt_residual,
                          sigma_norm2, uniform_pairs)

MAX_N = 2
MAX_D = 8
UNITARY_TOL = 1e-8
ISOMETRY_TOL = 1e-7


def rho(n: int, a: int, b: int) -> np.ndarray:
    """The canonical irrep ``X(a) Z(b)``."""
    return pauli_matrix(PauliOp(n, 0, a, b)).real


def elements(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(1 << n) for b in range(1 << n)]


def multiply(n: int, x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int, int]:
    """``X(a)Z(b) X(a')Z(b') = (-1)^{b.a'} X(a+a') Z(b+b')`` as ``(sign, a, b)``."""
    (a, b), (a2, b2) = x, y
    return parity(b & a2), a ^ a2, b ^ b2


@dataclass
class ApproxRep:
    n: int
    f: dict
    sigma: np.ndarray

    def __post_init__(self):
        keys = set(elements(self.n))
        if set(self.f) != keys:
            raise InvalidInput("f must be given on every X(a)Z(b)")
        self.f = {k: np.asarray(v, dtype=complex) for k, v in self.f.items()}
        d = self.d
        I = np.eye(d)
        for k, U in self.f.items():
            if U.shape != (d, d):
                raise DimensionError("all images must share one dimension")
            if np.max(np.abs(U.conj().T @ U - I)) > UNITARY_TOL:
                raise InvalidInput(f"f{k} is not unitary")
        if np.max(np.abs(self.f[(0, 0)] - I)) > UNITARY_TOL:
            raise InvalidInput("f(1) must be the identity")
        self.sigma = np.asarray(self.sigma, dtype=complex)
        if self.sigma.shape != (d, d):
            raise DimensionError("sigma must act on C^d")
        w = np.linalg.eigvalsh((self.sigma + self.sigma.conj().T) / 2)
        if w.min() < -1e-9 or abs(np.trace(self.sigma).real - 1) > 1e-9:
            raise InvalidInput("sigma must be a density matrix")

    @property
    def d(self) -> int:
        return self.f[(0, 0)].shape[0]

    def __call__(self, s: int, a: int, b: int) -> np.ndarray:
        return (-1) ** s * self.f[(a, b)]

    @classmethod
    def canonical(cls, n: int, sigma: np.ndarray | None = None, U: np.ndarray | None = None) -> "ApproxRep":
        """``f = U rho U^dagger`` (``U = I`` by default), ``sigma`` maximally mixed by default."""
        d0 = 1 << n
        U = np.eye(d0) if U is None else U
        sigma = np.eye(d0) / d0 if sigma is None else sigma
        return cls(n, {x: U @ rho(n, *x) @ U.conj().T for x in elements(n)}, sigma)

    @classmethod
    def from_generators(cls, n: int, xs, zs, sigma: np.ndarray) -> "ApproxRep":
        """``f(X(a) Z(b)) = prod_i xs[i]^{a_i} prod_i zs[i]^{b_i}`` in ascending ``i``."""
        d = np.asarray(xs[0]).shape[0]
        f = {}
        for a, b in elements(n):
            M = np.eye(d, dtype=complex)
            for i in range(n):
                if (a >> (n - 1 - i)) & 1:
                    M = M @ xs[i]
            for i in range(n):
                if (b >> (n - 1 - i)) & 1:
                    M = M @ zs[i]
            f[(a, b)] = M
        return cls(n, f, sigma)

    @classmethod
    def from_prover(cls, prover: CanonicalProver) -> "ApproxRep":
        """``f(X(a) Z(b)) = O'_2(a) O'_1(b)`` with the state after round 2 as ``sigma``."""
        n, W = prover.p, prover.width
        if prover.finals is None:
            raise InvalidInput("needs a many-qubit prover")
        basis = np.eye(1 << W, dtype=complex)

        def dense(q, a):
            return np.stack([clean_form_apply(prover, q, a, basis[:, j]) for j in range(1 << W)], axis=1)

        fx = {a: dense(2, a) for a in range(1 << n)}
        fz = {b: dense(1, b) for b in range(1 << n)}
        psi = prover.after_round2
        return cls(n, {(a, b): fx[a] @ fz[b] for a, b in elements(n)}, np.outer(psi, psi.conj()))


def g_matrix(n: int, d: int, a: int, b: int) -> np.ndarray:
    return np.kron(np.eye(d * (1 << n)), rho(n, a, b))


def gh_isometry(rep: ApproxRep) -> np.ndarray:
    """The stability-proof isometry ``C^d -> C^{d * 4^n}``; raises if ``V^dagger V`` drifts from ``I``."""
    n, d = rep.n, rep.d
    if n > MAX_N or d > MAX_D:
        raise ResourceError(f"Gowers-Hatami isometry limited to n <= {MAX_N}, d <= {MAX_D}")
    d0 = 1 << n
    V = np.zeros((d * d0 * d0, d), dtype=complex)
    for a, b in elements(n):
        V += np.kron(rep.f[(a, b)], rho(n, a, b).reshape(-1, 1))
    V *= np.sqrt(d0) / len(elements(n))
    defect = float(np.max(np.abs(V.conj().T @ V - np.eye(d))))
    if defect > ISOMETRY_TOL:
        raise NumericError(f"isometry defect {defect:.2e}")
    return V


def rep_residual(rep: ApproxRep, V: np.ndarray, mu: dict | None = None) -> float:
    """``E_{x ~ mu} ||f(x) - V^dagger g(x) V||^2_sigma``; ``mu`` maps ``(a, b)`` to weights (uniform by default)."""
    n, d = rep.n, rep.d
    if V.shape != (d * (1 << (2 * n)), d):
        raise DimensionError("isometry has the wrong shape")
    mu = mu or {x: 1.0 for x in elements(n)}
    tot = sum(mu.values())
    out = 0.0
    for (a, b), w in mu.items():
        if w:
            diff = rep.f[(a, b)] - V.conj().T @ g_matrix(n, d, a, b) @ V
            out += w / tot * sigma_norm2(diff, rep.sigma)
    return out


def spearman(x, y) -> float:
    """Spearman rank correlation with average ranks for ties."""
    def ranks(v):
        v = np.asarray(v, dtype=float)
        order = np.argsort(v, kind="mergesort")
        r = np.empty(len(v))
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
                j += 1
            r[order[i:j + 1]] = (i + j) / 2
            i = j + 1
        return r
    rx, ry = ranks(x), ranks(y)
    if rx.std() == 0 or ry.std() == 0:
        raise NumericError("rank correlation undefined for constant input")
    return float(np.corrcoef(rx, ry)[0, 1])


def corpus_link(k: int = 1, digits: int = 9) -> list[dict]:
    """Anticommutation residual against Gowers-Hatami residual over the many-qubit adversary corpus.

    Both columns are rounded to ``digits`` so float noise around zero does not
    break ties.
    """
    D = uniform_pairs(k)
    rows = []
    for spec in mqt_corpus_specs(k):
        prover = mqt_adversary(spec, k)
        rep = ApproxRep.from_prover(prover)
        V = gh_isometry(rep)
        rows.append({"family": spec["family"], "params": spec.get("params", {}), "seed": spec.get("seed"),
                     "anticommute": round(mqt_residual(prover, D), digits),
                     "gh": round(rep_residual(rep, V, D), digits)})
    return rows
