import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qiop.errors import InvalidInput, UnsatisfiableError
from qiop.f2core import BitVec
from qiop.hadcode import HadamardCode
from qiop.pcpp import (QUERIES_PER_RUN, BitsOracle, BooleanCircuit, CircuitBuilder, Gate, PcppProof,
                       acceptance_linear, acceptance_tables, assignment_proof, cheat_corpus, prove,
                       random_circuit, reference_verify, repetitions_for, run_once, toy_circuits, verify)


def and_circuit():
    b = CircuitBuilder(2)
    return b.build(b.AND(0, 1))


def test_circuit_eval_and_json():
    b = CircuitBuilder(3)
    o = b.OR(b.XOR(0, 1), b.AND(1, 2))
    C = b.build(o)
    for y in itertools.product((0, 1), repeat=3):
        assert C(y) == ((y[0] ^ y[1]) | (y[1] & y[2]))
    assert BooleanCircuit.from_json(C.to_json()) == C


def test_circuit_validation():
    with pytest.raises(InvalidInput):
        BooleanCircuit(1, (Gate("AND", (0, 1)),), 1)
    with pytest.raises(InvalidInput):
        Gate("NAND", (0, 1))


def test_constraints_pin_the_assignment():
    rng = np.random.default_rng(1)
    for _ in range(20):
        C = random_circuit(rng, 3, 4)
        for y in range(8):
            w = C.wires(BitVec(3, y).bits)
            if not w[C.output]:
                continue
            z = C.pack(w)
            from qiop.f2core import tensor
            assert not any(c.value(z, tensor(z, z, C.v)) for c in C.constraints())
            for i in range(C.inputs, C.v):
                z2 = z ^ (1 << (C.v - 1 - i))
                assert any(c.value(z2, tensor(z2, z2, C.v)) for c in C.constraints())


def test_prove_rejects_unsatisfied():
    with pytest.raises(UnsatisfiableError):
        prove(and_circuit(), [1, 0])


def test_query_count_constant():
    rng = np.random.default_rng(0)
    for gates in (1, 5, 20):
        C = random_circuit(rng, 3, gates)
        C = BooleanCircuit(C.inputs, C.gates + (Gate("CONST1"),), C.v)
        pf = prove(C, [0, 1, 1])
        tr = verify(C, [0, 1, 1], pf, rng, repetitions=3)
        assert tr.verdict and len(tr.queries) == 3 * QUERIES_PER_RUN == 57


def literal_acceptance(C, y, pf, encoding="plain"):
    """Run the verifier on every value of each test's randomness (tests are independent)."""
    v, vv, m = C.v, C.v * C.v, len(C.constraints())
    base = {"blr_A": [0, 0], "blr_B": [0, 0], "tensor": [0] * 5, "gates": [0, 0, 0], "input": [0, 0]}
    spaces = {"blr_A": [v, v], "blr_B": [vv, vv], "tensor": [v, v, v, v, vv], "gates": [m, v, vv],
              "input": [None, v]}
    out = {}
    for name, widths in spaces.items():
        ranges = [range(y.n) if w is None else range(1 << w) for w in widths]
        hits = tot = 0
        for combo in itertools.product(*ranges):
            rnd = dict(base)
            rnd[name] = list(combo)
            hits += run_once(C, y, pf, rnd, encoding)[name]
            tot += 1
        out[name] = hits / tot
    return out


def tiny_proofs(C, rng):
    pfs = [assignment_proof(C, z) for z in range(1 << C.v)]
    for _ in range(4):
        pfs.append(PcppProof(C.v, BitsOracle(rng.integers(0, 2, 1 << C.v)),
                             BitsOracle(rng.integers(0, 2, 1 << C.v ** 2))))
    return pfs


@pytest.mark.parametrize("encoding", ["plain", "hadamard"])
def test_table_route_matches_literal_run(encoding):
    rng = np.random.default_rng(3)
    b = CircuitBuilder(1)
    C = b.build(b.NOT(0))
    ys = [BitVec(1, 0), BitVec(1, 1)] if encoding == "plain" else [BitVec.from_str(s) for s in ("00", "01", "10", "11")]
    for y in ys:
        for pf in tiny_proofs(C, rng):
            lit = literal_acceptance(C, y, pf, encoding)
            tab = acceptance_tables(C, y, pf, encoding).tests
            for k in lit:
                assert tab[k] == pytest.approx(lit[k], abs=1e-12), k


def test_linear_route_matches_tables():
    rng = np.random.default_rng(4)
    for C in toy_circuits()[::5]:
        corpus = cheat_corpus(C, rng, 40, tables=False)
        for y in range(1 << C.inputs):
            yv = BitVec(C.inputs, y)
            for pf in corpus:
                a, t = acceptance_linear(C, yv, pf), acceptance_tables(C, yv, pf)
                for k in a.tests:
                    assert a.tests[k] == pytest.approx(t.tests[k], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 12), st.integers(0, 2 ** 32 - 1))
def test_completeness_is_exact(ins, gates, seed):
    rng = np.random.default_rng(seed)
    C = random_circuit(rng, ins, gates)
    for y in range(1 << ins):
        yv = BitVec(ins, y)
        if C(yv):
            pf = prove(C, yv)
            assert acceptance_linear(C, yv, pf).total == 1.0
            assert reference_verify(C, yv, pf) if C.v <= 14 else True
            assert verify(C, yv, pf, rng, repetitions=2).verdict


def test_hadamard_input_completeness():
    rng = np.random.default_rng(5)
    b = CircuitBuilder(2)
    C = b.build(b.XOR(0, 1))
    code = HadamardCode(2)
    for s in (1, 2):
        m = code.encode(BitVec(2, s))
        pf = prove(C, m, encoding="hadamard")
        assert acceptance_tables(C, m, pf, "hadamard").total == pytest.approx(1.0)
        assert reference_verify(C, m, pf, "hadamard")
        assert verify(C, m, pf, rng, 4, "hadamard").verdict


def test_reference_verify_rejects_wrong_input():
    C = and_circuit()
    pf = prove(C, [1, 1])
    assert not reference_verify(C, BitVec.from_str("01"), pf)


def test_repetitions_formula():
    assert repetitions_for(0.001, 0.25) == 25
    assert repetitions_for(0.5, 0.5) == 1
    assert (1 - 0.25) ** repetitions_for(1e-3, 0.25) <= 1e-3
