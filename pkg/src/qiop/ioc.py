"""Interactive oracle commitment built on the Hadamard code and the PCPP.

The prover commits to ``s`` by sending ``m = E(s)``. On receiving a circuit
``C`` it answers with the claimed value ``r`` and a PCPP proof that ``m`` lies
in ``{E(s') : C(s') = r}``. That language is the set of ``m`` satisfying
``(C(D(m)) + r + 1) AND T(m)``; the PCPP checks membership of ``T`` through
its Hadamard-encoded input test instead of explicit tester gates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ResourceError
from .f2core import BitVec
from .hadcode import HadamardCode, as_oracle
from .pcpp import (MEASURED_REJECTION, QUERIES_PER_RUN, BooleanCircuit, CircuitBuilder, PcppProof, acceptance,
                   prove, repetitions_for, verify)

DEFAULT_EPS = 0.001
MAX_MESSAGE_BITS = 10


def ioc_commit(s: BitVec) -> BitVec:
    if s.n > MAX_MESSAGE_BITS:
        raise ResourceError(f"commitments limited to {MAX_MESSAGE_BITS} message bits")
    return HadamardCode(s.n).encode(s)


def composed_circuit(C: BooleanCircuit, r: int) -> BooleanCircuit:
    """Circuit whose output is ``C(s) + r + 1``: ``C`` itself for ``r = 1``, its negation for ``r = 0``."""
    if r == 1:
        return C
    b = CircuitBuilder(C.inputs)
    b.gates = list(C.gates)
    return b.build(b.NOT(C.output))


def ioc_respond(s: BitVec, C: BooleanCircuit) -> tuple[int, PcppProof]:
    if C.inputs != s.n:
        raise DimensionError("circuit arity differs from the committed string")
    r = C(s)
    return r, prove(composed_circuit(C, r), ioc_commit(s), encoding="hadamard")


def ioc_repetitions(eps: float = DEFAULT_EPS) -> int:
    return repetitions_for(eps, MEASURED_REJECTION)


@dataclass
class IocVerdict:
    accepted: bool
    output: int | None
    repetitions: int
    queries: list = field(default_factory=list)

    def __str__(self) -> str:
        return f"Accept({self.output})" if self.accepted else "Reject"


def ioc_verify(C: BooleanCircuit, eps: float, m, r: int, w: PcppProof,
               rng: np.random.Generator) -> IocVerdict:
    """Accept and output ``r`` iff every PCPP run on the composed circuit accepts."""
    reps = ioc_repetitions(eps)
    m = as_oracle(m)
    if m.size != 1 << C.inputs:
        raise DimensionError("commitment length does not match the circuit arity")
    Cr = composed_circuit(C, r)
    if w.v != Cr.v:
        return IocVerdict(False, None, reps)
    tr = verify(Cr, m, w, rng, reps, "hadamard")
    return IocVerdict(tr.verdict, r if tr.verdict else None, reps, tr.queries)


def ioc_acceptance(C: BooleanCircuit, eps: float, m, r: int, w: PcppProof) -> float:
    """Exact probability that :func:`ioc_verify` returns ``Accept(r)``."""
    Cr = composed_circuit(C, r)
    if w.v != Cr.v:
        return 0.0
    return acceptance(Cr, m, w, "hadamard").total ** ioc_repetitions(eps)


def ioc_queries(eps: float = DEFAULT_EPS) -> int:
    return ioc_repetitions(eps) * QUERIES_PER_RUN


@dataclass
class IocTranscript:
    m: BitVec
    C: BooleanCircuit
    r: int
    w: PcppProof
    verdict: IocVerdict

    def to_json(self) -> dict:
        return {"m": str(self.m), "C": self.C.to_json(), "r": self.r, "proof": self.w.note,
                "verdict": str(self.verdict), "repetitions": self.verdict.repetitions,
                "queries": len(self.verdict.queries)}


def run_honest(s: BitVec, C: BooleanCircuit, rng: np.random.Generator, eps: float = DEFAULT_EPS) -> IocTranscript:
    m = ioc_commit(s)
    r, w = ioc_respond(s, C)
    return IocTranscript(m, C, r, w, ioc_verify(C, eps, m, r, w, rng))
