import numpy as np
import pytest

from pitesg import fhs
from pitesg.fhs import FhsModel, bootstrap_sample


def test_single_value_pool():
    assert np.all(bootstrap_sample([3.5], 100, seed=0) == 3.5)


def test_two_value_frequencies():
    s = bootstrap_sample([1.0, 2.0], 100_000, seed=1)
    assert np.mean(s == 1.0) == pytest.approx(0.5, abs=0.01)


def test_fixed_seed():
    np.testing.assert_array_equal(bootstrap_sample(np.arange(10.0), 50, 3), bootstrap_sample(np.arange(10.0), 50, 3))


def test_empty_pool():
    with pytest.raises(ValueError):
        bootstrap_sample([], 5, 0)
    with pytest.raises(ValueError):
        FhsModel(np.array([]), np.array([]))


def test_identity_filter_is_plain_bootstrap():
    r = np.array([0.01, -0.02, 0.005, 0.03])
    m = FhsModel(r, np.full(4, 18.0))
    s = fhs.generate(m, 18.0, 10, 20, seed=2)
    idx = np.random.default_rng(2).integers(0, 4, size=(20, 10))
    np.testing.assert_allclose(s.returns, r[idx], rtol=1e-12)


def test_linearity_in_target(market_panel):
    m = FhsModel.fit(market_panel)
    a = fhs.generate(m, 15.0, 65, 500, seed=4).returns
    b = fhs.generate(m, 30.0, 65, 500, seed=4).returns
    np.testing.assert_allclose(b, 2 * a, rtol=1e-12)
    assert b.mean() == pytest.approx(2 * a.mean(), rel=1e-12)


def test_shape_and_support(market_panel):
    m = FhsModel.fit(market_panel)
    target = float(np.median(m.vix))
    s = fhs.generate(m, target, 65, 500, seed=5)
    assert s.shape == (500, 65)
    assert np.isin(s.returns, m.support(target)).all()


def test_invalid_target(market_panel):
    with pytest.raises(ValueError):
        fhs.generate(FhsModel.fit(market_panel), 0.0, 5, 5, 0)


def test_save_load(tmp_path):
    m = FhsModel(np.array([0.1, 0.2]), np.array([10.0, 20.0]))
    m.save(tmp_path / "f.json")
    m2 = FhsModel.load(tmp_path / "f.json")
    np.testing.assert_array_equal(m2.returns, m.returns)
