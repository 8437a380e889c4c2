import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize
from scipy.stats import spearmanr

from qiop.errors import InvalidInput, ResourceError
from qiop.qubit_tests import exp_i, haar_unitary, mqt_honest_prover, random_hermitian
from qiop.stability import (ApproxRep, corpus_link, elements, g_matrix, gh_isometry, multiply, rep_residual,
                            rho, spearman)


def random_density(d, rng):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s = A @ A.conj().T
    return s / np.trace(s).real


def random_rep(n, d, rng):
    f = {x: haar_unitary(d, rng) for x in elements(n)}
    f[(0, 0)] = np.eye(d)
    return ApproxRep(n, f, random_density(d, rng))


@pytest.mark.parametrize("n", [1, 2])
def test_exact_representation_has_zero_residual(n):
    rng = np.random.default_rng(n)
    rep = ApproxRep.canonical(n, random_density(1 << n, rng))
    V = gh_isometry(rep)
    assert np.max(np.abs(V.conj().T @ V - np.eye(rep.d))) <= 1e-7
    assert rep_residual(rep, V) <= 1e-7


@pytest.mark.parametrize("n", [1, 2])
def test_conjugated_representation_has_zero_residual(n):
    rng = np.random.default_rng(10 + n)
    U = haar_unitary(1 << n, rng)
    rep = ApproxRep.canonical(n, random_density(1 << n, rng), U)
    assert rep_residual(rep, gh_isometry(rep)) <= 1e-7


def test_canonical_rep_is_a_group_homomorphism():
    n = 2
    for x in elements(n):
        for y in elements(n):
            s, a, b = multiply(n, x, y)
            assert np.allclose(rho(n, *x) @ rho(n, *y), (-1) ** s * rho(n, a, b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 2), st.integers(1, 4))
def test_isometry_for_any_sign_equivariant_unitary_map(seed, n, d):
    rep = random_rep(n, d, np.random.default_rng(seed))
    V = gh_isometry(rep)
    assert np.max(np.abs(V.conj().T @ V - np.eye(d))) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_compressed_representation_is_the_twirl(seed):
    # V^dagger g(x) V = E_z f(z)^dagger f(z x)
    n, d = 1, 3
    rep = random_rep(n, d, np.random.default_rng(seed))
    V = gh_isometry(rep)
    for x in elements(n):
        acc = np.zeros((d, d), dtype=complex)
        for z in elements(n):
            s, a, b = multiply(n, z, x)
            acc += rep(0, *z).conj().T @ rep(s, a, b)
        acc /= len(elements(n))
        assert np.allclose(V.conj().T @ g_matrix(n, d, *x) @ V, acc, atol=1e-10)


def perturbed(eps, seed=0):
    rng = np.random.default_rng(seed)
    K = random_hermitian(2, rng)
    X = rho(1, 1, 0)
    Z = rho(1, 0, 1)
    return ApproxRep.from_generators(1, [X @ exp_i(K, eps)], [Z], np.eye(2) / 2)


def oracle_min_residual(rep, restarts=1):
    """Minimize the residual over all isometries C^2 -> C^8 by direct search."""
    d, D = rep.d, rep.d * 4
    rng = np.random.default_rng(0)

    def iso(v):
        A = (v[:D * d] + 1j * v[D * d:]).reshape(D, d)
        Q, R = np.linalg.qr(A)
        return Q * np.sign(np.diag(R)).conj()

    def obj(v):
        return rep_residual(rep, iso(v))

    V0 = gh_isometry(rep)
    starts = [np.concatenate([V0.real.ravel(), V0.imag.ravel()])]
    starts += [rng.normal(size=2 * D * d) for _ in range(restarts)]
    return min(minimize(obj, s, method="BFGS").fun for s in starts)


def test_perturbed_generator_residual_is_quadratic():
    vals = {}
    for eps in (0.05, 0.1, 0.2):
        rep = perturbed(eps)
        gh = rep_residual(rep, gh_isometry(rep))
        best = oracle_min_residual(rep)
        assert best <= gh + 1e-9
        # measured ratio is about 1.45 at these eps
        assert gh <= 2 * best + 1e-9
        vals[eps] = gh
    ratios = [vals[e] / e ** 2 for e in vals]
    assert max(ratios) / min(ratios) < 1.2
    assert 0 < vals[0.1] < 0.1


def test_one_sign_flip_against_the_canonical_isometry():
    n = 1
    rng = np.random.default_rng(4)
    mu = {x: float(w) for x, w in zip(elements(n), rng.random(4))}
    V = gh_isometry(ApproxRep.canonical(n))
    for x0 in elements(n)[1:]:
        f = {x: rho(n, *x) * (-1 if x == x0 else 1) for x in elements(n)}
        rep = ApproxRep(n, f, np.eye(2) / 2)
        want = 4 * mu[x0] / sum(mu.values())
        assert rep_residual(rep, V, mu) == pytest.approx(want, abs=1e-10)


def test_honest_prover_pipeline():
    rep = ApproxRep.from_prover(mqt_honest_prover(1, np.array([0.6, 0.8j])))
    assert rep.d == 8
    assert rep_residual(rep, gh_isometry(rep)) <= 1e-7


def test_monotone_link_over_the_corpus():
    rows = corpus_link(1)
    assert len(rows) == 50
    x = [r["anticommute"] for r in rows]
    y = [r["gh"] for r in rows]
    rs = spearman(x, y)
    assert rs == pytest.approx(spearmanr(x, y).statistic, abs=1e-12)
    assert rs >= 0.9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=3, max_size=30))
def test_spearman_matches_reference(pairs):
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    if len(set(x)) < 2 or len(set(y)) < 2:
        return
    assert spearman(x, y) == pytest.approx(spearmanr(x, y).statistic, abs=1e-12)


def test_input_validation():
    with pytest.raises(InvalidInput):
        ApproxRep(1, {x: rho(1, *x) * 1.1 for x in elements(1)}, np.eye(2) / 2)
    with pytest.raises(InvalidInput):
        ApproxRep(1, {(0, 0): np.eye(2)}, np.eye(2) / 2)
    with pytest.raises(InvalidInput):
        ApproxRep(1, {x: -rho(1, *x) for x in elements(1)}, np.eye(2) / 2)
    with pytest.raises(ResourceError):
        gh_isometry(ApproxRep.from_prover(mqt_honest_prover(2)))
