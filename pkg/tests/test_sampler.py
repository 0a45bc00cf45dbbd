import numpy as np
import pytest

from krausfold.channel import classify, completeness_defect
from krausfold.sampler import (
    RegionRequest,
    RetriesExhausted,
    SamplerConfig,
    dephasing_channel,
    identity_channel,
    sample_channel,
    sample_region,
)
from krausfold.tables import QUBIT5, QUTRIT_IO39, QUTRIT_SIO15, TABLES

REGIMES = (QUBIT5, QUTRIT_IO39, QUTRIT_SIO15)


def test_config_rejects_unknown_regime():
    with pytest.raises(ValueError):
        SamplerConfig(regime="qutrit")


def test_config_rejects_foreign_classes():
    with pytest.raises(ValueError):
        SamplerConfig(regime=QUTRIT_SIO15, active_classes=(1, 16))


@pytest.mark.parametrize("regime", REGIMES)
def test_seed_determinism(regime):
    a = sample_channel(SamplerConfig(regime=regime, seed=5))
    b = sample_channel(SamplerConfig(regime=regime, seed=5))
    c = sample_channel(SamplerConfig(regime=regime, seed=6))
    for x, y in zip(a.ops, b.ops):
        np.testing.assert_array_equal(x, y)
    assert any(np.max(np.abs(x - y)) > 1e-12 for x, y in zip(a.ops, c.ops))


@pytest.mark.parametrize("regime", REGIMES)
def test_full_regime_draw_is_channel(regime):
    for i in range(20):
        s = sample_channel(SamplerConfig(regime=regime, seed=i))
        assert completeness_defect(s) <= 1e-10


@pytest.mark.parametrize("regime", REGIMES)
def test_full_regime_covers_every_class_once(regime):
    s = sample_channel(SamplerConfig(regime=regime, seed=3))
    assert classify(s, regime) == sorted(TABLES[regime])


@pytest.mark.parametrize("regime", REGIMES)
def test_first_column_coefficients_are_gauge_fixed(regime):
    s = sample_channel(SamplerConfig(regime=regime, seed=4))
    table = TABLES[regime]
    for cls, op in zip(classify(s, regime), s.ops):
        row = table[cls][0]
        coeff = op[row - 1, 0]
        assert abs(coeff.imag) < 1e-15
        assert coeff.real > 0.0


def test_columns_are_normalized_across_ops():
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15, seed=7))
    stacked = np.array([op for op in s.ops])
    for j in range(3):
        assert np.sum(np.abs(stacked[:, :, j]) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_active_classes_draws_exactly_that_family():
    fam = (9, 12, 14, 15)
    rng = np.random.default_rng(11)
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15, active_classes=fam), rng)
    assert len(s) == 4
    assert tuple(classify(s, QUTRIT_SIO15)) == fam
    stacked = np.array([op for op in s.ops])
    for j in range(3):
        weight = np.sum(np.abs(stacked[:, :, j]) ** 2)
        if weight > 0:
            assert weight == pytest.approx(1.0, abs=1e-12)


def test_zero_retries_exhausts_immediately():
    with pytest.raises(RetriesExhausted):
        sample_channel(SamplerConfig(regime=QUBIT5, max_retries=0))


def test_region_request_validation():
    good = (0.5, 0, 0, 0, 0, 0, 0, 0.5)
    with pytest.raises(ValueError):
        RegionRequest(t=(0.5, 0.5))
    with pytest.raises(ValueError):
        RegionRequest(t=(1.0,) * 8)
    with pytest.raises(ValueError):
        RegionRequest(t=good, kind="lo")
    with pytest.raises(ValueError):
        RegionRequest(t=good, n_samples=-1)
    assert RegionRequest(t=good, kind="sio").regime == QUTRIT_SIO15
    assert RegionRequest(t=good, kind="IO").regime == QUTRIT_IO39


def test_region_empty_run():
    points, summary = sample_region(RegionRequest(t=(0,) * 8))
    assert points == []
    assert summary.n == 0
    assert summary.rejected_draws == 0
    assert summary.m_min is None


def test_region_anchor_points():
    t = (0.5, 0, 0, 0, 0, 0, 0, 0.5)
    points, summary = sample_region(RegionRequest(t=t, kind="sio", n_samples=2))
    assert [p.index for p in points] == [0, 1]
    np.testing.assert_allclose(points[0].m, t, atol=1e-14)
    np.testing.assert_allclose(points[1].m, (0, 0, 0, 0, 0, 0, 0, 0.5), atol=1e-14)
    assert points[0].report[1].margin == 0.0
    assert summary.violations == {1: 0, 2: 0, 3: 0, 4: 0}
    assert set(summary.min_margin) == {1}


def test_region_summary_shape():
    t = (0.5, 0, 0, 0, 0, 0, 0, 0.5)
    points, summary = sample_region(
        RegionRequest(t=t, kind="io", n_samples=70, seed=2)
    )
    assert summary.n == 70
    assert len(points) == 70
    assert [p.index for p in points] == list(range(70))
    assert len(summary.m_min) == 8
    assert len(summary.m_max) == 8
    assert summary.min_margin[1] >= -1e-9
    assert summary.violations[1] == 0


def test_region_independent_of_worker_count(monkeypatch):
    t = (0, 0, 0, 0, 0, 0, 0.5, 0.5)
    req = RegionRequest(t=t, kind="sio", n_samples=130, seed=9)
    monkeypatch.setenv("KF_THREADS", "1")
    serial, _ = sample_region(req)
    monkeypatch.setenv("KF_THREADS", "3")
    threaded, _ = sample_region(req)
    for p, q in zip(serial, threaded):
        assert p.index == q.index
        np.testing.assert_array_equal(p.m, q.m)
        assert p.report == q.report


def test_region_seed_changes_samples():
    t = (0.5, 0, 0, 0, 0, 0, 0, 0.5)
    a, _ = sample_region(RegionRequest(t=t, n_samples=4, seed=0))
    b, _ = sample_region(RegionRequest(t=t, n_samples=4, seed=1))
    np.testing.assert_array_equal(a[0].m, b[0].m)
    np.testing.assert_array_equal(a[1].m, b[1].m)
    assert np.max(np.abs(a[2].m - b[2].m)) > 1e-12


def test_anchor_channels():
    ident = identity_channel(3)
    assert len(ident) == 1
    assert completeness_defect(ident) == 0.0
    deph = dephasing_channel(3)
    assert len(deph) == 3
    assert completeness_defect(deph) == 0.0
    for j, op in enumerate(deph.ops):
        assert op[j, j] == 1.0
        assert np.count_nonzero(op) == 1
