import numpy as np
import pytest
from numpy.testing import assert_allclose

from pairjump.circle import TabulatedNoise, UniformNoise, WrappedNormalNoise
from pairjump.kinetic import bisector_tables
from pairjump.models import ModelSpec
from pairjump.oracle import (
    JointDensity,
    apply_generator,
    build_transition,
    marginal,
    pair_difference_profile,
    stationary,
)


def tabulated_wn(sigma2, M):
    return TabulatedNoise(WrappedNormalNoise(sigma2).tabulate(M).values)


def noise_masses(g, M):
    return g.tabulate(M).masses


def direct_cl_matrix(M, g_mass):
    """Dense N=2 CL kernel built straight from the definition: fair coin picks
    the leader, follower lands on leader + z with z ~ g."""
    P = np.zeros((M * M, M * M))
    for i in range(M):
        for j in range(M):
            x = i + M * j
            for z in range(M):
                P[x, i + M * ((i + z) % M)] += 0.5 * g_mass[z]      # i leads
                P[x, (j + z) % M + M * j] += 0.5 * g_mass[z]        # j leads
    return P


def direct_bdg_matrix(M, g_mass):
    """Dense N=2 BDG kernel: both members move to midpoint + independent
    noise, with boundary midpoints split over the two adjacent cells."""
    lo, hi, w_hi = bisector_tables(M)
    P = np.zeros((M * M, M * M))
    for i in range(M):
        for j in range(M):
            x = i + M * j
            for mid, q in ((lo[i, j], 1.0 - w_hi[i, j]), (hi[i, j], w_hi[i, j])):
                if q == 0.0:
                    continue
                for wi in range(M):
                    a = (mid + wi) % M
                    for wj in range(M):
                        b = (mid + wj) % M
                        P[x, a + M * b] += q * g_mass[wi] * g_mass[wj]
    return P


class TestBuildTransition:
    def test_cl_rows_stochastic(self):
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, 8)), 2, 8)
        rows = np.asarray(tm.P.sum(axis=1)).ravel()
        assert_allclose(rows, 1.0, rtol=0, atol=1e-12)

    def test_cl_uniform_doubly_stochastic(self):
        tm = build_transition(ModelSpec("cl", UniformNoise()), 2, 2)
        cols = np.asarray(tm.P.sum(axis=0)).ravel()
        assert_allclose(cols, 1.0, rtol=0, atol=1e-14)
        f = stationary(tm)
        assert_allclose(f.weights, 0.25, rtol=0, atol=1e-12)

    def test_cl_matches_direct_kernel(self):
        M = 8
        g = tabulated_wn(0.5, M)
        tm = build_transition(ModelSpec("cl", g), 2, M)
        want = direct_cl_matrix(M, noise_masses(g, M))
        assert_allclose(tm.P.toarray(), want, rtol=0, atol=1e-15)

    def test_bdg_matches_direct_kernel(self):
        M = 8
        g = tabulated_wn(0.5, M)
        tm = build_transition(ModelSpec("bdg", g), 2, M)
        want = direct_bdg_matrix(M, noise_masses(g, M))
        assert_allclose(tm.P.toarray(), want, rtol=0, atol=1e-15)

    def test_preserves_symmetry(self):
        M, N = 16, 3
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, M)), N, M)
        rng = np.random.default_rng(1)
        T = rng.random((M, M, M))
        T = T + T.transpose(1, 0, 2) + T.transpose(2, 1, 0) + \
            T.transpose(0, 2, 1) + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
        w = T.ravel(order="F")
        d = JointDensity(N, M, w / w.sum())
        out = (tm.P.T @ d.weights)
        O = out.reshape((M, M, M), order="F")
        for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]:
            assert_allclose(O, O.transpose(perm), rtol=0, atol=1e-14)

    def test_preserves_mass_and_positivity(self):
        M = 8
        tm = build_transition(ModelSpec("bdg", tabulated_wn(0.3, M)), 2, M)
        rng = np.random.default_rng(2)
        w = rng.random(M * M)
        w /= w.sum()
        out = tm.P.T @ w
        assert out.sum() == pytest.approx(1.0, abs=1e-12)
        assert out.min() >= 0.0

    def test_state_cap(self):
        with pytest.raises(ValueError, match="1048576"):
            build_transition(ModelSpec("cl", UniformNoise()), 10, 4)

    def test_kac_rejected(self):
        with pytest.raises(ValueError):
            build_transition(ModelSpec("kac", UniformNoise()), 2, 8)


class TestStationary:
    def test_uniform_noise_gives_uniform(self):
        tm = build_transition(ModelSpec("cl", UniformNoise()), 3, 8)
        f = stationary(tm)
        assert_allclose(f.weights, 1.0 / 8 ** 3, rtol=0, atol=1e-12)

    def test_residual_below_tol(self):
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, 16)), 3, 16)
        f = stationary(tm, tol=1e-12)
        res = np.abs(tm.P.T @ f.weights - f.weights).sum()
        assert res < 1e-12

    def test_one_variable_marginal_uniform(self):
        M = 16
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, M)), 3, M)
        f = stationary(tm)
        m1 = marginal(f, [0])
        assert_allclose(m1, 1.0 / M, rtol=0, atol=1e-8)

    def test_iteration_cap(self):
        # N=2 converges in one application, so use N=3 to hit the cap
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, 8)), 3, 8)
        with pytest.raises(RuntimeError, match="gap"):
            stationary(tm, tol=1e-12, max_iter=2)

    def test_n2_stationary_in_one_step(self):
        # for N=2 the pair-difference law of the stationary density is the
        # noise itself, reached after a single jump from independence
        M = 8
        g = tabulated_wn(0.5, M)
        tm = build_transition(ModelSpec("cl", g), 2, M)
        f = stationary(tm, tol=1e-12, max_iter=3)
        prof = pair_difference_profile(marginal(f, [0, 1]))
        assert_allclose(prof, noise_masses(g, M), rtol=0, atol=1e-12)

    def test_pair_marginal_translation_invariant(self):
        M = 16
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, M)), 3, M)
        f = stationary(tm)
        pw = marginal(f, [0, 1])
        prof = pair_difference_profile(pw)
        for d in range(M):
            col = np.array([pw[(m2 + d) % M, m2] for m2 in range(M)])
            assert_allclose(col, prof[d] / M, rtol=0, atol=1e-10)

    def test_bdg_stationary_exists(self):
        M = 8
        tm = build_transition(ModelSpec("bdg", tabulated_wn(0.5, M)), 2, M)
        f = stationary(tm, tol=1e-12)
        res = np.abs(tm.P.T @ f.weights - f.weights).sum()
        assert res < 1e-12
        assert f.weights.min() > 0.0


class TestMarginal:
    def test_product_density_factorizes(self):
        M = 8
        rng = np.random.default_rng(3)
        m = rng.random(M)
        m /= m.sum()
        d = JointDensity.product(3, m)
        assert_allclose(marginal(d, [0]), m, rtol=0, atol=1e-14)
        assert_allclose(marginal(d, [2]), m, rtol=0, atol=1e-14)
        assert_allclose(marginal(d, [0, 2]), np.outer(m, m), rtol=0, atol=1e-14)

    def test_marginal_over_all_is_identity(self):
        M = 4
        rng = np.random.default_rng(4)
        w = rng.random(M ** 3)
        w /= w.sum()
        d = JointDensity(3, M, w)
        assert_allclose(marginal(d, [0, 1, 2]), d.tensor(), rtol=0, atol=0)

    def test_order_respected(self):
        M = 4
        rng = np.random.default_rng(5)
        w = rng.random(M ** 2)
        w /= w.sum()
        d = JointDensity(2, M, w)
        a = marginal(d, [0, 1])
        b = marginal(d, [1, 0])
        assert_allclose(a, b.T, rtol=0, atol=0)

    def test_normalization_preserved(self):
        M = 8
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, M)), 3, M)
        f = stationary(tm)
        assert marginal(f, [1]).sum() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_coords(self):
        d = JointDensity.uniform(2, 4)
        with pytest.raises(ValueError):
            marginal(d, [])
        with pytest.raises(ValueError):
            marginal(d, [0, 0])
        with pytest.raises(ValueError):
            marginal(d, [2])


class TestGenerator:
    def test_annihilates_stationary(self):
        M = 16
        tm = build_transition(ModelSpec("cl", tabulated_wn(0.5, M)), 2, M)
        f = stationary(tm, tol=1e-12)
        out = apply_generator(tm, f)
        assert np.abs(out).sum() < 2 * 1e-12

    def test_mass_conservation(self):
        M = 8
        tm = build_transition(ModelSpec("bdg", tabulated_wn(0.3, M)), 2, M)
        rng = np.random.default_rng(6)
        w = rng.random(M * M)
        w /= w.sum()
        out = apply_generator(tm, JointDensity(2, M, w))
        assert abs(out.sum()) < 1e-12

    def test_uniform_noise_uniformizes_any_start(self):
        # with uniform g the only stationary density is uniform: power
        # iteration started from arbitrary densities lands there, and the
        # generator vanishes on the limit
        M = 8
        tm = build_transition(ModelSpec("cl", UniformNoise()), 2, M)
        rng = np.random.default_rng(7)
        for _ in range(5):
            w = rng.random(M * M)
            f = stationary(tm, tol=1e-13, start=w)
            assert_allclose(f.weights, 1.0 / (M * M), rtol=0, atol=1e-12)
            assert np.abs(apply_generator(tm, f)).sum() < 2 * 1e-12


class TestJointDensity:
    def test_uniform(self):
        d = JointDensity.uniform(2, 4)
        assert d.weights.shape == (16,)
        assert d.weights.sum() == pytest.approx(1.0)

    def test_tensor_layout(self):
        # weights are flattened with the first coordinate fastest
        M = 4
        w = np.zeros(16)
        w[0 + M * 1] = 1.0  # particle 0 in cell 0, particle 1 in cell 1
        d = JointDensity(2, M, w)
        assert d.tensor()[0, 1] == 1.0

    def test_product_layout(self):
        m = np.array([0.25, 0.75, 0.0, 0.0])
        d = JointDensity.product(2, m)
        assert_allclose(d.tensor(), np.outer(m, m), rtol=0, atol=0)

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            JointDensity(2, 4, np.full(16, 1.0))  # sums to 16
        with pytest.raises(ValueError):
            JointDensity(2, 4, np.full(15, 1.0 / 15))  # wrong size
