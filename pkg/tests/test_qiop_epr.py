import numpy as np
import pytest

from qiop.cliffham import CliffordHamiltonian, clifford_sweep, named_gate, term, toy_instances
from qiop.f2core import BitVec
from qiop.ioc import ioc_commit, ioc_queries
from qiop.paulisym import CliffordGate, PauliOp, pauli_matrix
from qiop.qiop_epr import (EprConfig, NeverTeleports, WrongWitness, cheat_library, epr_exact, epr_mc,
                           epr_run, honest_value, initial_state, masked_r_distribution, protocol_stages,
                           term_energy_distribution, top_state, xor_r_probabilities)
from qiop.qsim import Node


def no_style_instances():
    Sd = np.diag([1, -1j])
    return [CliffordHamiltonian(1, (term([0], "I"), term([0], "X"))),
            CliffordHamiltonian(1, (term([0], "I"), term([0], "H"), term([0], named_gate("H") @ Sd)))]


def test_teleported_halves_carry_the_pad():
    H = CliffordHamiltonian(2, (term([0], "I"), term([1], "I")))
    cfg = EprConfig(H, 1)
    prover = WrongWitness(np.array([1, 0, 0, 0]))
    stages = protocol_stages(cfg, prover)[:cfg.width]
    nodes = [(1.0, Node(initial_state(cfg, prover), {}))]
    for st in stages:
        nodes = [(p * q, c) for p, nd in nodes for q, c in st(nd)]
    assert len(nodes) == 16
    lay = cfg.layout()
    for p, nd in nodes:
        assert p == pytest.approx(1 / 16)
        s = nd.record["s"]
        s0, s1 = s >> 2, s & 3
        expect = pauli_matrix(PauliOp(2, 0, s1, 0)) @ pauli_matrix(PauliOp(2, 0, 0, s0)) @ np.array([1, 0, 0, 0])
        got = np.zeros(4, dtype=complex)
        for k, a in nd.state.amps.items():
            assert lay.get(k, "W") == 0 and lay.get(k, "R") == 0
            got[lay.get(k, "Rp")] += a
        assert abs(abs(np.vdot(expect, got)) - 1) < 1e-12


def completeness_cases():
    toys = toy_instances()
    cases = [(H, 1) for H in toys[:8] if H.n <= 3]
    cases += [(H, 3) for H in toys if H.n == 1][:3]
    return cases


@pytest.mark.parametrize("H,N", completeness_cases())
def test_honest_acceptance_matches_closed_form(H, N):
    res = epr_exact(EprConfig(H, N))
    assert res.acceptance == pytest.approx(honest_value(H, N, top_state(H)), abs=1e-8)


def test_perfect_witness_accepted_with_probability_one():
    H = CliffordHamiltonian(1, (term([0], "I"),))
    res = epr_exact(EprConfig(H, 3), WrongWitness(np.array([0, 1])))
    assert res.acceptance == pytest.approx(1.0, abs=1e-12)


def test_excited_witness_follows_the_formula():
    H = toy_instances()[2]
    psi = np.linalg.eigh(H.matrix())[1][:, -1]
    res = epr_exact(EprConfig(H, 1), WrongWitness(psi))
    assert res.acceptance == pytest.approx(honest_value(H, 1, psi), abs=1e-8)


def test_cheats_on_no_instance_single_copy():
    H = no_style_instances()[0]
    cfg = EprConfig(H, 1)
    for pv in cheat_library(H):
        assert epr_exact(cfg, pv).acceptance <= 0.5 + cfg.eps + 0.1
    assert epr_exact(cfg, NeverTeleports()).acceptance <= 0.55


@pytest.mark.slow
def test_cheats_on_no_instance_three_copies():
    H = no_style_instances()[1]
    cfg = EprConfig(H, 3)
    for pv in cheat_library(H):
        assert epr_exact(cfg, pv).acceptance <= 0.5 + cfg.eps + 0.1


@pytest.mark.parametrize("w,depth", [(1, 8), (2, 3)])
def test_same_dist_over_clifford_sweep(w, depth):
    rng = np.random.default_rng(w)
    phis = [np.eye(1 << w)[0]]
    for _ in range(2):
        v = rng.normal(size=1 << w) + 1j * rng.normal(size=1 << w)
        phis.append(v / np.linalg.norm(v))
    worst = 0.0
    for U in clifford_sweep(w, depth):
        C = CliffordGate(tuple(range(w)), U)
        for phi in phis:
            ref = term_energy_distribution(C, phi)
            for order in ("XZ", "ZX"):
                got = masked_r_distribution(C, phi, order)
                worst = max(worst, 0.5 * sum(abs(got[k] - ref[k]) for k in (0, 1)))
    assert worst <= 1e-9


def test_xor_r_identity():
    rng = np.random.default_rng(5)
    for H in toy_instances()[:6]:
        v = rng.normal(size=1 << H.n) + 1j * rng.normal(size=1 << H.n)
        phi = v / np.linalg.norm(v)
        for N in (1, 2, 3):
            if H.n * N > 6:
                continue
            l = tuple(int(x) for x in rng.integers(0, H.m, size=N))
            lhs, rhs = xor_r_probabilities(H, phi, l)
            assert lhs == pytest.approx(rhs, abs=1e-10)


def test_verifier_circuit_size_grows_but_queries_do_not():
    rng = np.random.default_rng(7)
    counts = []
    for n in (1, 2, 3):
        H = CliffordHamiltonian(n, (term([0], "H"),))
        t = epr_run(EprConfig(H, 1), None, rng)
        assert t.verdict in (True, False)
        counts.append(t.queries)
    assert counts == [ioc_queries()] * 3


def test_monte_carlo_agrees_with_exact():
    H = toy_instances()[2]
    cfg = EprConfig(H, 1)
    ex = epr_exact(cfg).acceptance
    mc = epr_mc(cfg, None, 4000, np.random.default_rng(8))
    assert abs(mc.acceptance - ex) <= 4 * mc.stderr + 1e-9


def test_commitment_is_codeword_of_pad():
    H = toy_instances()[2]
    t = epr_run(EprConfig(H, 1), None, np.random.default_rng(9))
    assert t.committed == t.s
    assert ioc_commit(BitVec(2, t.s)).n == 4
