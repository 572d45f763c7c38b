import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pitesg import garch
from pitesg.garch import (GarchError, GarchInfeasible, GarchParams, GarchState, fit_joint, fit_returns,
                          forecast_variance, loglik_returns_normal, loglik_returns_t4, loglik_vix,
                          simulate_paths, vix_from_variance, vix_model)
from pitesg.marketdata import AlignedPanel, slice_before, weekdays
from pitesg.optim import OptimConfig


def P(omega=0.1, alpha=0.1, beta=0.8, **kw):
    q = dict(omega_q=kw.pop("omega_q", 1e-5), alpha0_q=kw.pop("alpha0_q", 1e-5), beta0_q=kw.pop("beta0_q", 0.9))
    return GarchParams(omega, alpha, beta, **q, **kw)


def t4_logpdf(x, s2):
    """Unit-variance t(4) scaled to variance s2, via scipy."""
    scale = math.sqrt(s2 * 0.5)
    return stats.t.logpdf(x, df=4, scale=scale)


def oracle_variances(params, x, s2_init):
    out = [s2_init]
    for e in x - params.mu:
        out.append(params.omega + params.alpha0 * e * e + params.beta0 * out[-1])
    return np.array(out)


class TestReturnLikelihood:
    def test_single_zero_observation(self, use_backend):
        p = P(omega=1.0, alpha=0.0, beta=0.0)
        got = loglik_returns_t4(p, [0.0], sigma2_init=1.0)
        assert got == pytest.approx(t4_logpdf(0.0, 1.0), abs=1e-12)
        assert got == pytest.approx(math.lgamma(2.5) - math.lgamma(2.0) - 0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_zero_returns_collapse(self, use_backend):
        p = P(omega=0.3, alpha=0.0, beta=0.0)
        n = 25
        got = loglik_returns_t4(p, np.zeros(n), sigma2_init=0.3)
        assert got == pytest.approx(n * t4_logpdf(0.0, 0.3), abs=1e-10)

    def test_nonstationary_is_infeasible(self):
        with pytest.raises(GarchInfeasible):
            loglik_returns_t4(P(alpha=0.51, beta=0.5), [0.1, 0.2])

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 1.0), st.floats(0.0, 0.5), st.floats(0.0, 0.49), st.integers(0, 10_000))
    def test_property_per_term_oracle(self, omega, alpha, beta, seed):
        r = np.random.default_rng(seed)
        x = r.normal(size=50)
        p = P(omega, alpha, beta, mu=float(r.normal() * 0.1))
        s2 = oracle_variances(p, x, 0.7)
        terms = garch.loglik_returns_terms(p, x, "t4", sigma2_init=0.7)
        oracle_t = [t4_logpdf(e, v) for e, v in zip(x - p.mu, s2[:-1])]
        np.testing.assert_allclose(terms, oracle_t, atol=1e-8, rtol=0)
        assert loglik_returns_t4(p, x, 0.7) == pytest.approx(sum(oracle_t), abs=1e-8)
        oracle_n = [stats.norm.logpdf(e, scale=math.sqrt(v)) for e, v in zip(x - p.mu, s2[:-1])]
        assert loglik_returns_normal(p, x, 0.7) == pytest.approx(sum(oracle_n), abs=1e-8)

    def test_default_init_is_mean_square_residual(self):
        x = np.array([0.1, -0.2, 0.05, 0.3])
        p = P(mu=0.01)
        s2 = garch.filter_variance(p, x)
        assert s2[0] == pytest.approx(np.mean((x - 0.01) ** 2))


class TestVixModel:
    def test_unconditional_variance_cancels_gamma(self):
        for b in (0.3, 0.9, 0.99):
            p = P(omega_q=2e-6, alpha0_q=1e-6, beta0_q=b)
            sbar = garch.risk_neutral_unconditional(p)
            assert vix_from_variance(p, sbar) == pytest.approx(100 * math.sqrt(sbar * 252), rel=1e-12)

    def test_gamma_limit(self):
        assert garch._gamma(P(beta0_q=1e-12)) == pytest.approx(1 / 22, rel=1e-9)

    def test_hand_substitution(self):
        p = P(omega_q=0.00001, alpha0_q=0.00001, beta0_q=0.9)
        g = (1 - 0.9 ** 22) / (22 * (1 - 0.9))
        sbar = (0.00001 + 0.00001) / (1 - 0.9)
        s2 = 0.00025
        expected = 100 * math.sqrt((sbar * (1 - g) + g * s2) * 252)
        assert vix_model(p, GarchState(0.001, sigma2_q_next=s2)) == pytest.approx(expected, rel=1e-12)

    def test_singular_beta(self):
        with pytest.raises(GarchInfeasible):
            garch._gamma(P(beta0_q=1.0))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 1e-2), st.floats(1e-6, 1e-2), st.floats(0.01, 0.99))
    def test_property_increasing(self, a, b, beta):
        p = P(beta0_q=beta)
        lo, hi = sorted((a, b))
        if hi > lo:
            assert vix_from_variance(p, hi) > vix_from_variance(p, lo)

    def test_state_fallback(self):
        p = P()
        assert vix_model(p, GarchState(2e-4)) == vix_model(p, GarchState(1.0, sigma2_q_next=2e-4))


class TestVixLikelihood:
    def test_zero_gaps(self, use_backend):
        p = P(rho=0.5, Sigma=2.0)
        n = 10
        iv = 2.0 * (1 - 0.25)
        norm = -0.5 * (math.log(2 * math.pi) + math.log(2.0)) - 0.5 * (n - 1) * (math.log(2 * math.pi) + math.log(iv))
        assert loglik_vix(p, np.ones(n), np.ones(n)) == pytest.approx(norm, abs=1e-12)
        printed = -n / 2 * (math.log(2 * math.pi) + math.log(iv)) + 0.5 * (math.log(iv) - math.log(2.0))
        assert loglik_vix(p, np.ones(n), np.ones(n), form="printed") == pytest.approx(printed, abs=1e-12)
        assert norm == pytest.approx(printed, abs=1e-12)

    def test_rho_zero_is_iid(self, use_backend, rng):
        d = rng.normal(size=40)
        p = P(rho=0.0, Sigma=1.7)
        oracle = stats.norm.logpdf(d, scale=math.sqrt(1.7)).sum()
        assert loglik_vix(p, d, np.zeros(40)) == pytest.approx(oracle, abs=1e-10)

    def test_exact_ar_path(self, use_backend):
        rho, S = 0.6, 1.0
        d = rho ** np.arange(12)
        p = P(rho=rho, Sigma=S)
        norm = loglik_vix(p, np.zeros(12), np.zeros(12))
        # only the first gap contributes a quadratic term
        for form in ("exact", "printed"):
            assert loglik_vix(p, d, np.zeros(12), form) == pytest.approx(norm - 0.5, abs=1e-12)

    def test_forms_agree_at_unit_sigma(self, rng):
        d = rng.normal(size=30)
        p = P(rho=0.3, Sigma=1.0)
        assert loglik_vix(p, d, 0 * d) == pytest.approx(loglik_vix(p, d, 0 * d, "printed"), abs=1e-12)

    def test_rho_infeasible(self):
        with pytest.raises(GarchInfeasible):
            loglik_vix(P(rho=1.0), [1.0], [1.0])

    def test_per_term_oracle(self, rng):
        for _ in range(20):
            rho, S = rng.uniform(-0.95, 0.95), rng.uniform(0.1, 5)
            d = rng.normal(size=15) * math.sqrt(S)
            innov = math.sqrt(S * (1 - rho * rho))
            oracle = stats.norm.logpdf(d[0], scale=math.sqrt(S)) + sum(
                stats.norm.logpdf(d[t], loc=rho * d[t - 1], scale=innov) for t in range(1, 15))
            assert loglik_vix(P(rho=rho, Sigma=S), d, 0 * d) == pytest.approx(oracle, abs=1e-8)


class TestForecastAndSimulation:
    def test_k1(self):
        assert forecast_variance(P(0.7, 0.4, 0.3), GarchState(1.3), 1) == 1.3

    def test_examples(self):
        p = P(0.7, 0.4, 0.3)
        assert forecast_variance(p, GarchState(1.0), 2) == pytest.approx(1.4)
        assert forecast_variance(p, GarchState(1.0), 3) == pytest.approx(1.68)

    def test_long_run_limit(self):
        p = P(0.7, 0.4, 0.3)
        assert forecast_variance(p, GarchState(5.0), 10_000) == pytest.approx(0.7 / 0.3, rel=1e-6)

    def test_iid_limit(self):
        p = P(0.5, 0.0, 0.0)
        s = simulate_paths(p, GarchState(0.5), 100, 1000, seed=1, dist="t4")
        assert s.returns.var() == pytest.approx(0.5, rel=0.05)

    def test_shape_and_reproducible(self, use_backend):
        p = P(0.01, 0.1, 0.8)
        a = simulate_paths(p, GarchState(0.02), 65, 500, seed=3)
        b = simulate_paths(p, GarchState(0.02), 65, 500, seed=3)
        assert a.shape == (500, 65)
        assert a.returns.tobytes() == b.returns.tobytes()

    def test_t4_shocks_unit_variance(self):
        w = garch.draw_shocks(np.random.default_rng(0), 400_000)
        assert w.var() == pytest.approx(1.0, rel=0.03)


TRUTH = GarchParams(2e-6, 0.08, 0.9, 2e-6, 2e-6, 0.95, mu=0.0003, rho=0.9, Sigma=1.0)


def model_panel(n=1500, seed=0):
    """Returns and observed VIX generated by the joint model itself."""
    rng = np.random.default_rng(seed)
    w = garch.draw_shocks(rng, (1, n))
    x, _ = garch.kernels.garch_simulate(w, TRUTH.mu, TRUTH.omega, TRUTH.alpha0, TRUTH.beta0,
                                        TRUTH.unconditional_variance)
    x = x[0]
    d = np.empty(n)
    d[0] = rng.normal()
    for t in range(1, n):
        d[t] = TRUTH.rho * d[t - 1] + math.sqrt(1 - TRUTH.rho ** 2) * rng.normal()
    days = tuple(weekdays(dt.date(2001, 1, 1), dt.date(2010, 1, 1))[:n])
    return AlignedPanel(days, np.exp(np.cumsum(x)), x, garch.model_vix_series(TRUTH, x) + d, np.zeros(n, bool))


@pytest.fixture(scope="module")
def joint():
    train = model_panel()
    return train, fit_joint(train, OptimConfig(restarts=2), return_result=True)


class TestFitting:
    def test_short_panel(self, market_panel):
        with pytest.raises(GarchError):
            fit_joint(market_panel.rows(0, 10))

    def test_returns_fit_recovers_truth(self):
        from pitesg.synthdata import GarchSimSpec, simulate_garch_path

        x, _ = simulate_garch_path(GarchSimSpec(0.7, 0.4, 0.3, 5000, seed=0))
        p = fit_returns(x, dist="normal")
        assert abs(p.omega - 0.7) < 0.1 and abs(p.alpha0 - 0.4) < 0.1 and abs(p.beta0 - 0.3) < 0.1

    def test_joint_fit_deterministic_and_feasible(self, joint):
        train, (p, res) = joint
        p.check_physical()
        p.check_risk_neutral()
        p.check_vix_ar()
        q = fit_joint(train, OptimConfig(restarts=2))
        assert p == q

    def test_joint_recovers_truth(self, joint):
        _, (p, _) = joint
        assert p.alpha0 == pytest.approx(TRUTH.alpha0, abs=0.03)
        assert p.beta0 == pytest.approx(TRUTH.beta0, abs=0.03)
        assert p.beta0_q == pytest.approx(TRUTH.beta0_q, abs=0.02)
        assert p.rho == pytest.approx(TRUTH.rho, abs=0.03)
        assert p.Sigma == pytest.approx(TRUTH.Sigma, rel=0.15)

    def test_joint_local_optimality(self, joint):
        train, (p, _) = joint
        best = garch.loglik_joint(p, train.spx_log_return, train.vix_level)
        r = np.random.default_rng(0)
        names = ("omega", "alpha0", "beta0", "omega_q", "alpha0_q", "beta0_q", "rho", "Sigma")
        checked = 0
        for _ in range(100):
            kw = {k: getattr(p, k) * (1 + 0.01 * r.normal()) for k in names}
            q = GarchParams(**kw, mu=p.mu)
            try:
                ll = garch.loglik_joint(q, train.spx_log_return, train.vix_level)
            except GarchInfeasible:
                continue
            checked += 1
            assert ll <= best + 1e-6
        assert checked > 50

    def test_tied_mode(self, market_panel):
        train = slice_before(market_panel, market_panel.dates[800])
        p = fit_joint(train, OptimConfig(restarts=1), risk_neutral="tied")
        assert (p.omega_q, p.alpha0_q, p.beta0_q) == (p.omega, p.alpha0, p.beta0)

    def test_checkpoint_roundtrip(self, joint, tmp_path):
        _, (p, _) = joint
        garch.save_params(p, tmp_path / "g.json")
        assert garch.load_params(tmp_path / "g.json") == p
