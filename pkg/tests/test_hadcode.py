import itertools

import numpy as np
import pytest

from qiop.errors import DimensionError, InvalidInput
from qiop.f2core import BitVec, parity
from qiop.hadcode import (CountingOracle, HadamardCode, TableOracle, TesterParams, blr_acceptance,
                          blr_acceptance_enumerated, blr_test, lift_blr, lift_decode, lift_selfcorrect,
                          read_observable, self_correct, self_correct_error, self_correct_flip_probs)
from qiop.qsim import RegisterLayout, SparseState, measure


def bv(s):
    return BitVec.from_str(s)


def flip(w, *positions):
    v = w.val
    for p in positions:
        v ^= 1 << (w.n - 1 - p)
    return BitVec(w.n, v)


def test_encode_decode_examples():
    c = HadamardCode(2)
    assert c.encode(bv("00")) == bv("0000") and c.tester_T(bv("0000")) == 1
    assert c.encode(bv("10")) == bv("0011")
    assert c.decode(bv("0001")) == bv("00")
    assert c.tester_T(bv("0001")) == 0
    with pytest.raises(InvalidInput):
        c.decode(bv("000"))


def test_encode_matches_generator_rows():
    for k in range(5):
        c = HadamardCode(k)
        G = c.generator
        for s in range(1 << k):
            assert c.encode(BitVec(k, s)) == G.mat_vec(BitVec(k, s))


def test_decode_tie_goes_to_smallest_message():
    c2 = HadamardCode(2)
    assert c2.decode(bv("0111")) == bv("01")  # distance 1 from three codewords


@pytest.mark.parametrize("k", [1, 2, 3])
def test_decode_minimizes_distance_exhaustive(k):
    c = HadamardCode(k)
    cws = [c.encode(BitVec(k, s)) for s in range(1 << k)]
    for w in range(1 << c.n):
        word = BitVec(c.n, w)
        dists = [(word ^ cw).popcount() for cw in cws]
        best = min(dists)
        assert c.decode(word).val == dists.index(best)
        assert c.distance(word) == best
        assert c.tester_T(word) == int(best == 0)
    for s in range(1 << k):
        assert c.decode(cws[s]).val == s


@pytest.mark.parametrize("k", [1, 2, 3])
def test_blr_accepts_codewords_for_all_randomness(k):
    c = HadamardCode(k)
    for s in range(1 << k):
        w = c.encode(BitVec(k, s))
        assert all(blr_test(w, r) == 1 for r in range(1 << (2 * k)))


def _brute_blr_rejection(bits):
    n = len(bits)
    bad = sum(1 for x in range(n) for y in range(n) if bits[x] ^ bits[y] != bits[x ^ y])
    return bad / n / n


def test_blr_single_flip_k3_frozen():
    zero = BitVec(8, 0)
    # odd-hit pair counts over 64 (x, y): 22 at position 0, 18 elsewhere
    assert 1 - blr_acceptance(flip(zero, 0)) == pytest.approx(22 / 64, abs=1e-12)
    for f in range(1, 8):
        w = flip(zero, f)
        assert _brute_blr_rejection(w.bits) == 18 / 64
        assert 1 - blr_acceptance(w) == pytest.approx(18 / 64, abs=1e-12)
        assert blr_acceptance_enumerated(w) == pytest.approx(blr_acceptance(w), abs=1e-12)


def test_blr_random_word_monte_carlo():
    rng = np.random.default_rng(5)
    trials = 10_000
    acc = 0
    for _ in range(trials):
        w = BitVec(8, int(rng.integers(256)))
        acc += blr_test(w, int(rng.integers(64)))
    sigma = (0.25 / trials) ** 0.5
    assert abs(acc / trials - 0.5) <= 5 * sigma


@pytest.mark.parametrize("k", [2, 3])
def test_local_testing_bound_exhaustive(k):
    c = HadamardCode(k)
    kappa = np.inf
    for s in range(1 << k):
        cw = c.encode(BitVec(k, s))
        for nflip in (1, 2):
            for pos in itertools.combinations(range(c.n), nflip):
                w = flip(cw, *pos)
                delta = c.distance(w) / c.n
                if delta == 0 or delta > 0.25:
                    continue
                rej = 1 - blr_acceptance(w)
                assert rej == pytest.approx(_brute_blr_rejection(w.bits), abs=1e-12)
                kappa = min(kappa, rej / delta)
    assert kappa >= 0.25


def test_self_correct_single_flip_frozen():
    c = HadamardCode(3)
    cw = c.encode(bv("101"))
    w = flip(cw, 5)
    for p in range(8):
        truth = cw[p]
        wrong = sum(self_correct(w, p, r) != truth for r in range(8))
        if p == 0:
            assert wrong == 0
        else:
            assert wrong == 2
        assert self_correct_error(w, p, truth) == wrong / 8


@pytest.mark.parametrize("k", [2, 3])
def test_self_correction_error_bound_exhaustive(k):
    c = HadamardCode(k)
    for w in range(1 << c.n):
        word = BitVec(c.n, w)
        delta = c.distance(word) / c.n
        if delta > 1 / 8:
            continue
        cw = c.encode(c.decode(word))
        for p in range(c.n):
            assert self_correct_error(word, p, cw[p]) <= 2 * delta + 1e-12


def test_flip_probs_match_enumeration():
    rng = np.random.default_rng(2)
    w = BitVec(16, int(rng.integers(1 << 16)))
    probs = self_correct_flip_probs(w)
    for q in range(16):
        assert probs[q] == pytest.approx(self_correct_error(w, q, 0), abs=1e-12)


def test_counting_oracle_logs_queries():
    w = CountingOracle(TableOracle(bv("0110")), "w")
    blr_test(w, (1, 2))
    self_correct(w, 3, 1)
    assert [q[1] for q in w.log] == [1, 2, 3, 1, 2]


def test_tester_params_validation():
    TesterParams()
    with pytest.raises(InvalidInput):
        TesterParams(eps=0.01)


def _coded_layout(k, extra):
    return RegisterLayout(extra + [("R", 1 << k)])


def test_lift_decode_writes_message():
    c = HadamardCode(2)
    L = RegisterLayout([("D", 2), ("R", 4)])
    for s in range(4):
        key = L.put(0, "R", c.encode(BitVec(2, s)).val)
        out = lift_decode(SparseState(L, {key: 1}), c)
        (k2,) = out.amps
        assert L.get(k2, "D") == s
        assert lift_decode(out, c).amps == {key: 1}


def test_lift_blr_on_codeword_superposition():
    c = HadamardCode(2)
    L = RegisterLayout([("L", 1), ("R", 4), ("T_L", 4)])
    amps = {}
    for s in range(4):
        for r in range(16):
            amps[L.put(L.put(0, "R", c.encode(BitVec(2, s)).val), "T_L", r)] = 1 / 8
    st = SparseState(L, amps)
    out = lift_blr(st, c)
    assert out.register_value_probs("L") == pytest.approx({1: 1.0})
    assert lift_blr(out, c).amps == pytest.approx(st.amps)
    with pytest.raises(DimensionError):
        lift_blr(st, HadamardCode(1))


def test_lift_selfcorrect_involution_and_value():
    c = HadamardCode(2)
    L = RegisterLayout([("S", 1), ("R", 4), ("T_S", 2)])
    w = flip(c.encode(bv("11")), 2)
    amps = {L.put(L.put(0, "R", w.val), "T_S", r): 0.5 for r in range(4)}
    st = SparseState(L, amps)
    out = lift_selfcorrect(st, c, p=1)
    for key in out.amps:
        assert L.get(key, "S") == self_correct(w, 1, L.get(key, "T_S"))
    assert lift_selfcorrect(out, c, p=1).amps == pytest.approx(st.amps)


def test_read_observable_on_codeword():
    c = HadamardCode(3)
    L = RegisterLayout([("S", 1), ("R", 8)])
    for s in range(8):
        cw = c.encode(BitVec(3, s))
        st = SparseState(L, {L.put(0, "R", cw.val): 1})
        for p in range(8):
            for r in range(8):
                res = measure(st, read_observable(c, p, L, r=r, S="S"))
                assert [lab for lab, _, _ in res] == [cw[p]]


def test_read_observable_squares_to_identity_dense():
    c = HadamardCode(2)
    L = RegisterLayout([("S", 1), ("R", 4), ("T_S", 2)])
    dim = 1 << L.width
    for p in range(4):
        O = read_observable(c, p, L, S="S")
        M = np.zeros((dim, dim))
        for b in range(dim):
            out = O.apply(SparseState(L, {b: 1}))
            for k, a in out.amps.items():
                M[k, b] = a.real
        np.testing.assert_allclose(M @ M, np.eye(dim), atol=1e-12)


def test_read_observable_acts_as_z_on_decoded_message():
    c = HadamardCode(2)
    L = RegisterLayout([("P", 2), ("R", 4)])
    rng = np.random.default_rng(0)
    alpha = rng.normal(size=4) + 1j * rng.normal(size=4)
    alpha /= np.linalg.norm(alpha)
    st = SparseState(L, {L.put(L.put(0, "P", s), "R", c.encode(BitVec(2, s)).val): alpha[s] for s in range(4)})
    for p in range(4):
        for r in range(4):
            out = read_observable(c, p, L, r=r).apply(st)
            for s in range(4):
                key = L.put(L.put(0, "P", s), "R", c.encode(BitVec(2, s)).val)
                assert out.amps[key] == pytest.approx((-1) ** parity(p & s) * alpha[s])
