import numpy as np

from qiop.f2core import BitVec
from qiop.hadcode import HadamardCode
from qiop.ioc import (DEFAULT_EPS, composed_circuit, ioc_acceptance, ioc_commit, ioc_queries, ioc_respond,
                      ioc_verify, run_honest)
from qiop.pcpp import BooleanCircuit, CircuitBuilder, QUERIES_PER_RUN, cheat_corpus, toy_circuits

bv = BitVec.from_str


def parity_circuit(k):
    b = CircuitBuilder(k)
    return b.build(b.xor_all(list(range(k))))


def test_commit_examples():
    assert str(ioc_commit(bv("00"))) == "0000"
    assert str(ioc_commit(bv("10"))) == "0011"
    for k in range(1, 4):
        code = HadamardCode(k)
        for s in range(1 << k):
            assert code.decode(ioc_commit(BitVec(k, s))).val == s


def test_respond_examples():
    b = CircuitBuilder(2)
    zero = b.build(b.const(0))
    r, _ = ioc_respond(bv("10"), zero)
    assert r == 0
    t = run_honest(bv("10"), zero, np.random.default_rng(0))
    assert str(t.verdict) == "Accept(0)"
    assert ioc_respond(bv("10"), parity_circuit(2))[0] == 1
    assert ioc_respond(bv("01"), BooleanCircuit(2, (), 0))[0] == 0


def test_honest_accepts_with_probability_one():
    rng = np.random.default_rng(1)
    for k in (1, 2, 3):
        C = parity_circuit(k)
        for s in range(1 << k):
            sv = BitVec(k, s)
            m = ioc_commit(sv)
            r, w = ioc_respond(sv, C)
            assert ioc_acceptance(C, DEFAULT_EPS, m, r, w) == 1.0
            v = ioc_verify(C, DEFAULT_EPS, m, r, w, rng)
            assert v.accepted and v.output == C(sv)


def test_query_count_is_constant():
    rng = np.random.default_rng(2)
    counts = set()
    for k, extra in ((1, 0), (2, 3), (3, 8)):
        b = CircuitBuilder(k)
        o = b.xor_all(list(range(k)))
        for _ in range(extra):
            o = b.NOT(o)
        C = b.build(o)
        t = run_honest(BitVec(k, 1), C, rng)
        counts.add(len(t.verdict.queries))
    assert counts == {ioc_queries()} and ioc_queries() % QUERIES_PER_RUN == 0


def toy_instances():
    for C in toy_circuits(3):
        if composed_circuit(C, 0).v <= 4:
            yield C


def test_binding_over_toy_instances():
    """Exact: Pr[output differs from C(D(m)) and accept] <= eps for every cheat and every m."""
    rng = np.random.default_rng(3)
    worst = 0.0
    for C in toy_instances():
        code = HadamardCode(C.inputs)
        for r in (0, 1):
            corpus = cheat_corpus(composed_circuit(C, r), rng, 100)
            for mv in range(1 << code.n):
                m = BitVec(code.n, mv)
                if C(code.decode(m)) == r and code.distance(m) == 0:
                    continue
                for w in corpus:
                    p = ioc_acceptance(C, DEFAULT_EPS, m, r, w)
                    if C(code.decode(m)) != r or code.distance(m) / code.n >= 0.25:
                        worst = max(worst, p)
                        assert p <= DEFAULT_EPS, (C.to_json(), str(m), r, w.note, p)
    assert worst <= DEFAULT_EPS
