import math

import numpy as np
import pytest

from conftest import low_rank, uniform_omega
from radar_lowrank import (
    ObservationSet,
    SvtConfig,
    default_svt_config,
    frobenius_norm,
    nuclear_norm,
    project_onto_omega,
    shrink,
    singular_value_profile,
    svt_complete,
)
from radar_lowrank.errors import Divergence, OutOfBounds, ShapeMismatch, ValidationError


def full_omega(M):
    m, n = M.shape
    i, j = np.divmod(np.arange(m * n), n)
    return ObservationSet((m, n), i, j, M[i, j])


def test_observation_set_invariants():
    with pytest.raises(ValidationError):
        ObservationSet((3, 3), [], [], [])
    with pytest.raises(OutOfBounds):
        ObservationSet((3, 3), [3], [0], [1.0])
    with pytest.raises(ValidationError):
        ObservationSet((3, 3), [1, 1], [2, 2], [1.0, 2.0])
    with pytest.raises(ValidationError):
        ObservationSet((3, 3), [0], [0], [np.nan])
    om = ObservationSet((2, 2), [1, 0], [0, 1], [5.0, 7.0])
    assert list(om.entries()) == [(0, 1, 7.0), (1, 0, 5.0)]
    assert om.sampling_fraction == 0.5


def test_project_all_entries_copies(rng):
    A = rng.standard_normal((4, 5))
    proj = project_onto_omega(A, full_omega(np.zeros((4, 5))))
    np.testing.assert_array_equal(proj.dense(), A)


def test_project_diagonal():
    A = np.arange(9.0).reshape(3, 3)
    omega = ObservationSet((3, 3), [0, 1, 2], [0, 1, 2], [0.0, 0.0, 0.0])
    assert project_onto_omega(A, omega).values.tolist() == [0.0, 4.0, 8.0]


def test_project_shape_mismatch():
    omega = ObservationSet((3, 3), [0], [0], [1.0])
    with pytest.raises(ShapeMismatch):
        project_onto_omega(np.ones((3, 4)), omega)


def test_shrink_diagonal_soft_threshold():
    out = np.asarray(shrink(np.diag([3.0, 2.0, 1.0]), 1.5))
    np.testing.assert_allclose(out, np.diag([1.5, 0.5, 0.0]), atol=1e-12)


def test_shrink_above_top_value_is_zero(rng):
    A = rng.standard_normal((6, 4))
    s1 = singular_value_profile(A)[0]
    assert np.all(np.asarray(shrink(A, s1)) == 0.0)
    assert np.all(np.asarray(shrink(A, 2 * s1)) == 0.0)


def test_shrink_known_spectrum_rank(rng):
    q1, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    q2, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    sigma = np.linspace(30.0, 1.0, 30)
    A = (q1 * sigma) @ q2.T
    out = shrink(A, sigma[4])
    s = singular_value_profile(out)
    assert np.count_nonzero(s > 1e-10 * s[0]) == 4
    np.testing.assert_allclose(s[:4], sigma[:4] - sigma[4], rtol=1e-10)


def test_shrink_rejects_nonpositive_tau():
    with pytest.raises(ValidationError):
        shrink(np.eye(2), 0.0)


@pytest.mark.parametrize("seed", range(20))
def test_shrink_nonexpansive(seed):
    g = np.random.default_rng(seed)
    A = g.standard_normal((15, 10))
    B = g.standard_normal((15, 10))
    tau = g.uniform(0.1, 3.0)
    lhs = frobenius_norm(np.asarray(shrink(A, tau)) - np.asarray(shrink(B, tau)))
    assert lhs <= frobenius_norm(A - B) * (1 + 1e-12)


def test_shrink_minimizes_prox_objective(rng):
    A = rng.standard_normal((8, 6))
    tau = 1.2

    def objective(X):
        return tau * nuclear_norm(X) + 0.5 * frobenius_norm(X - A) ** 2

    X = np.asarray(shrink(A, tau))
    best = objective(X)
    for _ in range(50):
        assert objective(X + 1e-2 * rng.standard_normal(A.shape)) >= best - 1e-12


def test_default_config_examples():
    cfg = default_svt_config(ObservationSet((200, 200), np.arange(12000) // 200,
                                            np.arange(12000) % 200, np.ones(12000)))
    assert cfg.tau == pytest.approx(1000.0, rel=1e-15)
    assert cfg.delta == pytest.approx(4.0, rel=1e-15)
    assert cfg.max_iters == 500 and cfg.tolerance == 1e-4 and cfg.inner_rank_cap is None

    full = full_omega(np.ones((3, 4)))
    assert default_svt_config(full).delta == pytest.approx(1.2)

    k = round(1930 * 413 / 3)
    lin = np.arange(k) * 3
    large = ObservationSet((1930, 413), lin // 413, lin % 413, np.ones(k))
    cfg = default_svt_config(large)
    assert cfg.tau == pytest.approx(5 * math.sqrt(797090), rel=1e-15)
    assert cfg.tau == pytest.approx(4463.995, abs=1e-3)
    assert cfg.delta == pytest.approx(3.6, abs=1e-4)


def test_config_validation():
    with pytest.raises(ValidationError):
        SvtConfig(tau=-1.0, delta=1.0)
    with pytest.raises(ValidationError):
        SvtConfig(tau=1.0, delta=1.0, tolerance=1.0)
    with pytest.raises(ValidationError):
        SvtConfig(tau=1.0, delta=1.0, max_iters=0)


def test_svt_rank_one_half_sampled():
    g = np.random.default_rng(7)
    M = np.outer(g.standard_normal(50), g.standard_normal(50))
    res = svt_complete(uniform_omega(M, 0.5, seed=1))
    assert res.converged
    assert frobenius_norm(np.asarray(res.X_hat) - M) / frobenius_norm(M) <= 1e-3
    assert res.rank_of_solution == 1


def test_svt_fully_observed():
    M = low_rank(30, 20, 3, seed=2)
    res = svt_complete(full_omega(M))
    assert res.converged and res.iterations_used < 50
    assert frobenius_norm(np.asarray(res.X_hat) - M) / frobenius_norm(M) <= 1e-4


@pytest.mark.parametrize("seed", range(10))
def test_svt_exact_recovery_small_scale(seed):
    m, n, r = 60, 60, 2
    omega = uniform_omega(low_rank(m, n, r, seed), 0.5, seed)
    assert r * (m + n - r) <= 0.2 * len(omega)
    res = svt_complete(omega)
    M = low_rank(m, n, r, seed)
    assert res.converged
    assert res.final_residual <= 1e-4
    assert all(math.isfinite(h) for h in res.residual_history)
    assert frobenius_norm(np.asarray(res.X_hat) - M) / frobenius_norm(M) <= 1e-3


def test_svt_deterministic():
    omega = uniform_omega(low_rank(40, 30, 2, seed=5), 0.5, 5)
    a = svt_complete(omega)
    b = svt_complete(omega)
    assert np.array_equal(np.asarray(a.X_hat), np.asarray(b.X_hat))
    assert a.residual_history == b.residual_history


def test_svt_divergence_detected():
    omega = uniform_omega(low_rank(30, 30, 2, seed=3), 0.5, 3)
    cfg = SvtConfig(tau=1e-3, delta=20.0, max_iters=200)
    with pytest.raises(Divergence) as info:
        svt_complete(omega, cfg)
    assert len(info.value.history) >= 2


def test_svt_rank_cap_limits_iterates():
    omega = uniform_omega(low_rank(40, 40, 4, seed=9), 0.5, 9)
    cfg = SvtConfig(tau=200.0, delta=2.4, max_iters=30, inner_rank_cap=2)
    assert svt_complete(omega, cfg).rank_of_solution <= 2


def test_svt_zero_observations_give_zero_matrix():
    omega = ObservationSet((4, 4), [0, 1], [0, 1], [0.0, 0.0])
    res = svt_complete(omega)
    assert res.converged and not np.any(np.asarray(res.X_hat))
