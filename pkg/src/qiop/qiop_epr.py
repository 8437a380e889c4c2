"""Teleportation-based qIOP with a committed one-time pad.

The verifier holds the ``R'`` halves of ``N*n`` EPR pairs. The prover
teleports ``N`` witness copies through the ``R`` halves, obtaining the pad
``s = (s0, s1)``, and commits to ``s`` with the IOC. The verifier samples
term indices ``l``, measures the term's Pauli observables on its halves in
slot order, and asks the IOC for ``C(s)`` where ``C`` undoes the pad on its
readouts. It accepts iff the IOC accepts with output 0.

Register layout: ``W`` (witness copies), ``R`` (prover halves), ``Rp``
(verifier halves), each ``N*n`` qubits; copy ``i`` occupies qubits
``i*n .. i*n + n - 1`` of each register. The pad is packed as ``s0 ‖ s1``
with ``s0`` the most significant ``N*n`` bits.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .cliffham import CliffordHamiltonian, SLOTS, ground_state, term_paulis
from .errors import InvalidInput, ResourceError
from .f2core import BitVec, parity
from .ioc import DEFAULT_EPS, composed_circuit, ioc_acceptance, ioc_commit, ioc_respond, ioc_verify
from .paulisym import CliffordGate, PauliOp, clifford_conjugate, single_z
from .pcpp import BooleanCircuit, CircuitBuilder, PcppProof, assignment_proof, prove
from .qsim import (Node, PauliObservable, RegisterLayout, SparseState, apply_pauli, basis_state,
                   branch_enumerate, draw, make_epr, measure, measure_epr_basis, measure_stage, monte_carlo)

MAX_TELEPORTED = 4


@dataclass
class EprConfig:
    H: CliffordHamiltonian
    N: int
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInput("need at least one copy")
        if self.N * self.H.n > MAX_TELEPORTED:
            raise ResourceError(f"at most {MAX_TELEPORTED} teleported qubits")

    @property
    def width(self) -> int:
        return self.N * self.H.n

    def layout(self) -> RegisterLayout:
        w = self.width
        return RegisterLayout([("W", w), ("R", w), ("Rp", w)])


def honest_value(H: CliffordHamiltonian, N: int, phi: np.ndarray) -> float:
    """``1/2 + <phi|1-2H|phi>^N / 2``."""
    A = np.eye(1 << H.n) - 2 * H.matrix()
    e = float(np.vdot(phi, A @ phi).real)
    return 0.5 + e ** N / 2


def top_state(H: CliffordHamiltonian) -> np.ndarray:
    """Eigenvector of the largest eigenvalue of ``1 - 2H`` (the ground state of ``H``)."""
    return ground_state(H)


# ---------------------------------------------------------------------------
# Verifier circuit


def slot_corrections(P: PauliOp) -> tuple[int, int]:
    """Masks ``(on s0, on s1)`` of the pad correction for measuring ``P`` after ``X(s1)Z(s0)``.

    With ``P = ±X(a)Z(b)Y(c)`` the correction is ``a.s0 + b.s1 + c.s1 + c.s0``,
    i.e. the x-part of ``P`` against ``s0`` and the z-part against ``s1``.
    """
    return P.x, P.z


def verifier_circuit(cfg: EprConfig, l: tuple[int, ...], r: dict) -> BooleanCircuit:
    """``C(x) = XOR_i (1 + OR_j (r_ij + corrections))`` over the ``2*N*n`` pad bits."""
    n, N, w = cfg.H.n, cfg.N, cfg.width
    b = CircuitBuilder(2 * w)
    copies = []
    for i in range(N):
        slots = []
        for j, P in enumerate(term_paulis(cfg.H, l[i])):
            mx, mz = slot_corrections(P)
            wires = [i * n + q for q in range(n) if (mx >> (n - 1 - q)) & 1]
            wires += [w + i * n + q for q in range(n) if (mz >> (n - 1 - q)) & 1]
            acc = b.xor_all(wires, empty=0) if wires else None
            if r[(i, j)]:
                acc = b.const(1) if acc is None else b.NOT(acc)
            elif acc is None:
                acc = b.const(0)
            slots.append(acc)
        copies.append(b.NOT(b.or_all(slots)))
    return b.build(b.xor_all(copies))


# ---------------------------------------------------------------------------
# Provers


class EprProver:
    """Honest behaviour; cheats override the hooks."""

    name = "honest"
    teleports = True

    def witness(self, cfg: EprConfig) -> np.ndarray:
        return top_state(cfg.H)

    def commit(self, cfg: EprConfig, s: int) -> int:
        return s

    def respond(self, cfg: EprConfig, C: BooleanCircuit, s: int) -> tuple[int, PcppProof]:
        return ioc_respond(BitVec(2 * cfg.width, s), C)


class WrongWitness(EprProver):
    name = "wrong_witness"

    def __init__(self, psi: np.ndarray):
        self.psi = np.asarray(psi, dtype=complex) / np.linalg.norm(psi)

    def witness(self, cfg):
        return self.psi


class FlipPadBit(EprProver):
    name = "flip_pad_bit"

    def __init__(self, bit: int = 0):
        self.bit = bit

    def commit(self, cfg, s):
        return s ^ (1 << (2 * cfg.width - 1 - self.bit))


class CommitOther(EprProver):
    """Commits to a fixed pad regardless of the measured one."""

    name = "commit_other"

    def __init__(self, pad: int = 0):
        self.pad = pad

    def commit(self, cfg, s):
        return self.pad


class ClaimZero(EprProver):
    """Honest commitment, always claims ``C(s) = 0`` and sends the best proof it can find."""

    name = "claim_zero"

    def respond(self, cfg, C, s):
        sv = BitVec(2 * cfg.width, s)
        if C(sv) == 0:
            return ioc_respond(sv, C)
        C0 = composed_circuit(C, 0)
        m = ioc_commit(sv)
        cands = _lying_proofs(C0, sv)
        best = max(cands, key=lambda pf: ioc_acceptance(C, cfg.eps, m, 0, pf))
        return 0, best


class BadProof(EprProver):
    """Honest commitment and claim, but the proof encodes a corrupted wire assignment."""

    name = "bad_proof"

    def respond(self, cfg, C, s):
        sv = BitVec(2 * cfg.width, s)
        r = C(sv)
        Cr = composed_circuit(C, r)
        z = Cr.pack(Cr.wires(sv.bits)) ^ 1
        return r, assignment_proof(Cr, z, note="bad_proof")


class NeverTeleports(EprProver):
    """Skips the EPR measurement and commits to a uniformly random pad."""

    name = "never_teleports"
    teleports = False


def _lying_proofs(C0: BooleanCircuit, s: BitVec) -> list[PcppProof]:
    """Linear proofs for ``C0`` on input ``s`` that ``C0`` rejects."""
    wires = C0.wires(s.bits)
    z = C0.pack(wires)
    out = [assignment_proof(C0, z, note="true_wires"),
           assignment_proof(C0, z | 1 << (C0.v - 1 - C0.output), note="forced_output")]
    if C0.inputs <= 8:
        for t in range(1 << C0.inputs):
            tv = BitVec(C0.inputs, t)
            if C0(tv.bits):
                out.append(prove(C0, tv))
                break
    return out


def cheat_library(H: CliffordHamiltonian) -> list[EprProver]:
    vals, vecs = np.linalg.eigh(H.matrix())
    return [WrongWitness(vecs[:, -1]), FlipPadBit(0), CommitOther(0), ClaimZero(), BadProof(),
            NeverTeleports()]


# ---------------------------------------------------------------------------
# Protocol


def initial_state(cfg: EprConfig, prover: EprProver) -> SparseState:
    lay = cfg.layout()
    st = basis_state(lay, {})
    st = make_epr(st, lay.qubits("R"), lay.qubits("Rp"))
    phi = prover.witness(cfg)
    if phi.shape != (1 << cfg.H.n,):
        raise InvalidInput("witness dimension does not match the Hamiltonian")
    full = reduce(np.kron, [phi] * cfg.N)
    amps = {}
    shift = lay.shift("W")
    for key, a in st.amps.items():
        for idx in np.flatnonzero(np.abs(full) > 1e-14):
            amps[key | (int(idx) << shift)] = a * full[idx]
    return SparseState(lay, amps)


def _pad_stages(cfg: EprConfig, prover: EprProver) -> list:
    lay = cfg.layout()
    w = cfg.width
    stages = []
    if not prover.teleports:
        pads = list(range(1 << (2 * w)))
        stages.append(draw("s", pads))
        return stages

    def epr_stage(q):
        qa, qb = lay.qubits("W")[q], lay.qubits("R")[q]

        def stage(node):
            for (s0, s1), p, post in measure_epr_basis(node.state, qa, qb, reset=True):
                pad = node.record.get("s", 0)
                pad |= (s0 << (2 * w - 1 - q)) | (s1 << (w - 1 - q))
                yield p, node.with_(state=post, s=pad)
        return stage

    for q in range(w):
        stages.append(epr_stage(q))
    return stages


def _measure_stages(cfg: EprConfig) -> list:
    lay = cfg.layout()
    n = cfg.H.n
    rp = lay.qubits("Rp")
    paulis = [term_paulis(cfg.H, i) for i in range(cfg.H.m)]
    stages = [draw("l", list(itertools.product(range(cfg.H.m), repeat=cfg.N)))]
    for i in range(cfg.N):
        for j in range(SLOTS):
            def obs(node, i=i, j=j):
                ops = paulis[node.record["l"][i]]
                if j >= len(ops):
                    return None
                return PauliObservable(ops[j], rp[i * n:(i + 1) * n])
            stages.append(measure_stage(f"r{i}_{j}", obs))
    return stages


def protocol_stages(cfg: EprConfig, prover: EprProver) -> list:
    return _pad_stages(cfg, prover) + _measure_stages(cfg)


def _readouts(cfg: EprConfig, rec: dict) -> dict:
    return {(i, j): rec[f"r{i}_{j}"] for i in range(cfg.N) for j in range(SLOTS) if f"r{i}_{j}" in rec}


@dataclass
class EprTranscript:
    s: int
    committed: int
    l: tuple
    readouts: dict
    circuit: BooleanCircuit
    claim: int
    verdict: bool
    queries: int = 0

    def to_json(self) -> dict:
        return {"s": self.s, "committed": self.committed, "l": list(self.l),
                "readouts": {f"{i},{j}": v for (i, j), v in sorted(self.readouts.items())},
                "claim": self.claim, "verdict": "accept" if self.verdict else "reject",
                "queries": self.queries}


class _LeafScore:
    """Exact IOC acceptance at a leaf, cached on (circuit, commitment, claim, proof)."""

    def __init__(self, cfg: EprConfig, prover: EprProver):
        self.cfg, self.prover = cfg, prover
        self.cache: dict = {}
        self.circuits: dict = {}

    def __call__(self, node: Node) -> float:
        cfg = self.cfg
        rec = node.record
        committed = self.prover.commit(cfg, rec["s"])
        readouts = _readouts(cfg, rec)
        ckey = (rec["l"], tuple(sorted(readouts.items())))
        if ckey not in self.circuits:
            self.circuits[ckey] = verifier_circuit(cfg, rec["l"], readouts)
        C = self.circuits[ckey]
        key = (C, committed, rec["s"])
        if key not in self.cache:
            m = ioc_commit(BitVec(2 * cfg.width, committed))
            claim, proof = self.prover.respond(cfg, C, committed)
            self.cache[key] = 0.0 if claim != 0 else ioc_acceptance(C, cfg.eps, m, 0, proof)
        return self.cache[key]


def epr_exact(cfg: EprConfig, prover: EprProver | None = None):
    """Exact acceptance probability by enumerating every protocol branch."""
    prover = prover or EprProver()
    return branch_enumerate(protocol_stages(cfg, prover), _LeafScore(cfg, prover),
                            Node(initial_state(cfg, prover), {}))


def epr_mc(cfg: EprConfig, prover: EprProver | None, trials: int, rng: np.random.Generator):
    prover = prover or EprProver()
    return monte_carlo(protocol_stages(cfg, prover), _LeafScore(cfg, prover),
                       Node(initial_state(cfg, prover), {}), trials, rng)


def epr_run(cfg: EprConfig, prover: EprProver | None, rng: np.random.Generator) -> EprTranscript:
    """One sampled execution including a randomized IOC verification."""
    prover = prover or EprProver()
    node = Node(initial_state(cfg, prover), {})
    for stage in protocol_stages(cfg, prover):
        kids = [(q, c) for q, c in stage(node) if q > 0]
        ps = np.array([q for q, _ in kids])
        node = kids[int(rng.choice(len(kids), p=ps / ps.sum()))][1]
    rec = node.record
    committed = prover.commit(cfg, rec["s"])
    readouts = _readouts(cfg, rec)
    C = verifier_circuit(cfg, rec["l"], readouts)
    m = ioc_commit(BitVec(2 * cfg.width, committed))
    claim, proof = prover.respond(cfg, C, committed)
    v = ioc_verify(C, cfg.eps, m, claim, proof, rng)
    return EprTranscript(rec["s"], committed, rec["l"], readouts, C, claim,
                         v.accepted and v.output == 0, len(v.queries))


# ---------------------------------------------------------------------------
# Identity checks


def masked_r_distribution(C: CliffordGate, phi: np.ndarray, order: str = "XZ") -> dict[int, float]:
    """Law of ``r = 1 + OR_j (r_j + correction_j)`` for uniform pads.

    The pad acts as ``X(s1)Z(s0)`` (``order="XZ"``) or ``Z(s0)X(s1)``
    (``"ZX"``); the two differ by a global phase only.
    """
    w = len(C.support)
    local = CliffordGate(tuple(range(w)), C.matrix)
    ops = [clifford_conjugate(local, single_z(w, q)) for q in range(w)]
    lay = RegisterLayout([("Q", w)])
    qs = lay.qubits("Q")
    base = SparseState(lay, {k: complex(a) for k, a in enumerate(phi) if abs(a) > 1e-15})
    dist = {0: 0.0, 1: 0.0}
    for s0 in range(1 << w):
        for s1 in range(1 << w):
            X, Z = PauliOp(w, 0, s1, 0), PauliOp(w, 0, 0, s0)
            first, second = (Z, X) if order == "XZ" else (X, Z)
            st = apply_pauli(apply_pauli(base, first, qs), second, qs)
            branches = [(1.0, st, 0)]
            for P in ops:
                nxt = []
                corr = parity(P.x & s0) ^ parity(P.z & s1)
                for p, state, bad in branches:
                    for lab, q, post in measure(state, PauliObservable(P, qs)):
                        nxt.append((p * q, post, bad | (lab ^ corr)))
                branches = nxt
            for p, _, bad in branches:
                dist[1 ^ bad] += p / (1 << (2 * w))
    return dist


def term_energy_distribution(C: CliffordGate, phi: np.ndarray) -> dict[int, float]:
    """Outcome law of measuring ``1 - 2 C^dagger|0><0|C`` on ``phi`` (label 1 = in the projector)."""
    w = len(C.support)
    zero = np.zeros((1 << w, 1 << w))
    zero[0, 0] = 1
    P = C.matrix.conj().T @ zero @ C.matrix
    p1 = float(np.vdot(phi, P @ phi).real)
    return {0: 1 - p1, 1: p1}


def xor_r_probabilities(H: CliffordHamiltonian, phi: np.ndarray, l: tuple[int, ...]) -> tuple[float, float]:
    """``(Pr[XOR r'_i = 0], <phi^N| (I + ⊗(1 - 2H_{l_i}))/2 |phi^N>)``."""
    dim = 1 << H.n
    ps = []
    for li in l:
        p1 = float(np.vdot(phi, H.term_projector(li) @ phi).real)
        ps.append(p1)
    even = 0.0
    for bits in itertools.product((0, 1), repeat=len(l)):
        if sum(bits) % 2 == 0:
            even += float(np.prod([p if b else 1 - p for p, b in zip(ps, bits)]))
    big = reduce(np.kron, [np.eye(dim) - 2 * H.term_projector(li) for li in l])
    full = reduce(np.kron, [phi] * len(l))
    rhs = float(np.vdot(full, (np.eye(big.shape[0]) + big) @ full).real / 2)
    return even, rhs
