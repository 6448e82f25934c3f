import numpy as np
import pytest

from rpswealth import (
    ConfigError,
    ExponentialDensity,
    GridMeasure,
    GridSpec,
    HarrisEnvelope,
    ModelParams,
    SolverConfig,
    SquareDensity,
    decay_envelope,
    first_moment,
    ingest_density,
    ph_p0_distance,
    ph_p0_ratio,
    project_p0,
    project_ph,
    solve_nonlinear,
    total_mass,
    wealth_loss,
)

H = 0.5


def random_measure(spec, rng, n_cells=8, signed=True):
    w = np.zeros(spec.shape)
    idx = rng.choice(spec.m * (spec.K + 1), size=n_cells, replace=False)
    vals = rng.uniform(0.1, 1.0, size=n_cells)
    if signed:
        vals *= rng.choice([-1.0, 1.0], size=n_cells)
    w.flat[idx] = vals
    return GridMeasure(spec, w)


class TestProjectPh:
    def test_square_folds_to_uniform_base(self):
        spec = GridSpec(h=H, m=4, K=10)
        for k0 in (0, 3, 7):
            mu = ingest_density(SquareDensity(k0), spec)
            folded = project_ph(mu)
            np.testing.assert_allclose(folded.w[:, 0], 1.0 / spec.m)
            assert np.all(folded.w[:, 1:] == 0.0)

    def test_single_cell_folds_to_base_level(self):
        spec = GridSpec(h=H, m=4, K=10)
        w = np.zeros(spec.shape)
        w[2, 6] = 1.0
        folded = project_ph(GridMeasure(spec, w))
        assert folded.w[2, 0] == 1.0
        assert folded.w.sum() == 1.0

    def test_exponential_closed_form(self):
        alpha = 1.0
        spec = GridSpec(h=H, m=16, K=100)
        mu = ingest_density(ExponentialDensity(alpha), spec, "simpson")
        folded = project_ph(mu)
        d = spec.delta
        lefts = np.arange(spec.m) * d
        closed = (np.exp(-alpha * lefts) - np.exp(-alpha * (lefts + d)))
        closed *= (1.0 - np.exp(-alpha * spec.width)) / (1.0 - np.exp(-alpha * H))
        np.testing.assert_allclose(folded.w[:, 0], closed, rtol=1e-7)

    def test_idempotent_mass_preserving_linear(self):
        rng = np.random.default_rng(12)
        spec = GridSpec(h=H, m=4, K=12)
        for _ in range(10):
            mu = random_measure(spec, rng)
            nu = random_measure(spec, rng)
            once = project_ph(mu)
            np.testing.assert_array_equal(project_ph(once).w, once.w)
            assert total_mass(once) == pytest.approx(total_mass(mu), abs=1e-14)
            a = 1.7
            lin = project_ph(a * mu + nu)
            np.testing.assert_allclose(lin.w, (a * once + project_ph(nu)).w, atol=1e-12)

    def test_fold_is_stationary(self):
        spec = GridSpec(h=H, m=2, K=10)
        mu = project_ph(ingest_density(SquareDensity(4), spec))
        params = ModelParams(eta=3.0, h=H)
        cfg = SolverConfig(dt0=1e-2, t_end=2.0, snapshot_every=10)
        traj = solve_nonlinear(mu, params, cfg, limit=None)
        assert np.all(traj.B == 0.0)
        np.testing.assert_array_equal(traj.final_state.w, mu.w)


class TestProjectP0:
    def test_cases(self):
        spec = GridSpec(h=H, m=2, K=5)
        assert project_p0(GridMeasure.zero(spec)).atoms == ((0.0, 0.0),)
        prob = ingest_density(SquareDensity(2), spec)
        assert project_p0(prob).atoms == ((0.0, pytest.approx(1.0, abs=1e-15)),)
        w = np.zeros(spec.shape)
        w[0, 1] = 0.25
        w[1, 3] = -0.75
        assert project_p0(GridMeasure(spec, w)).atoms[0][1] == pytest.approx(-0.5, abs=1e-15)


class TestEnvelope:
    def test_values(self):
        env = HarrisEnvelope(C=5.5465, lam=0.1202, eta=3.0, B0=1.0, d0=2.0)
        assert decay_envelope(0.0, env) == pytest.approx(2.0 * 5.5465)
        expected = 5.5465 * 2.0 * 10.0 ** (-0.1202)
        assert decay_envelope(9.0, env) == pytest.approx(expected, rel=1e-12)
        frozen = HarrisEnvelope(C=5.5465, lam=0.1202, eta=3.0, B0=0.0, d0=2.0)
        assert decay_envelope(100.0, frozen) == decay_envelope(0.0, frozen)

    def test_validation(self):
        with pytest.raises(ConfigError):
            HarrisEnvelope(C=0.5, lam=0.1, eta=3.0, B0=1.0, d0=1.0)
        env = HarrisEnvelope(C=2.0, lam=0.1, eta=3.0, B0=1.0, d0=1.0)
        with pytest.raises(ConfigError):
            decay_envelope(-1.0, env)


class TestWealthLoss:
    def test_anchor_cases(self):
        spec = GridSpec(h=H, m=2, K=6)
        assert wealth_loss(ingest_density(SquareDensity(0), spec)) == 0.0
        w = np.zeros(spec.shape)
        w[1, 2] = 1.0
        assert wealth_loss(GridMeasure(spec, w)) == pytest.approx(1.0, abs=1e-15)

    def test_moment_identity(self):
        rng = np.random.default_rng(21)
        spec = GridSpec(h=H, m=8, K=30)
        for _ in range(30):
            mu = random_measure(spec, rng, n_cells=12)
            lhs = first_moment(mu)
            rhs = first_moment(project_ph(mu)) + wealth_loss(mu)
            assert abs(lhs - rhs) <= 1e-12


class TestPhP0Distance:
    def test_base_cell_distance_is_half_cell(self):
        # mass in the first cell folds onto itself; the collapse moves it
        # to 0, half a cell away from the midpoint
        spec = GridSpec(h=H, m=8, K=5)
        w = np.zeros(spec.shape)
        w[0, 0] = 1.0
        d = ph_p0_distance(GridMeasure(spec, w))
        assert d == pytest.approx(spec.delta / 2.0, abs=1e-9)

    def test_uniform_base_period_quadratic_bound(self):
        spec = GridSpec(h=H, m=32, K=2)
        w = np.zeros(spec.shape)
        w[:, 0] = spec.delta  # density 1 on [0, h)
        d = ph_p0_distance(GridMeasure(spec, w))
        assert d <= H * H / 2.0 + 1e-9

    def test_ratio_bounded_by_h_for_nonnegative(self):
        rng = np.random.default_rng(31)
        spec = GridSpec(h=H, m=8, K=20)
        for _ in range(30):
            mu = random_measure(spec, rng, n_cells=10, signed=False)
            assert ph_p0_ratio(mu) <= H + 1e-9

    def test_exponential_ratio_approaches_half_h(self):
        devs = []
        for h in (0.5, 0.25, 0.125):
            spec = GridSpec(h=h, m=32, K=int(np.ceil(35.0 / h)))
            mu = ingest_density(ExponentialDensity(1.0), spec, "simpson")
            ratio = ph_p0_distance(mu) / (h / 2.0)
            devs.append(abs(ratio - 1.0))
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] <= 0.05

    def test_zero_measure(self):
        spec = GridSpec(h=H, m=4, K=4)
        assert ph_p0_distance(GridMeasure.zero(spec)) == 0.0
        assert ph_p0_ratio(GridMeasure.zero(spec)) == 0.0
