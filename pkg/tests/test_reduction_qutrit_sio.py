import numpy as np
import pytest

from krausfold.channel import KrausSet, channels_equal, classify
from krausfold.reduction import (
    REGIME_BOUNDS,
    SIO_GROUPS,
    closed_form_unitary_sio_triple,
    reduce_qutrit_sio,
    run_merge_group,
)
from krausfold.sampler import SamplerConfig, sample_channel
from krausfold.tables import QUTRIT_SIO15


def family_ids(group):
    return tuple(sorted(set(group.member_indices) | {group.residual_target}))


def test_group_table():
    names = [g.name for g in SIO_GROUPS]
    assert names == ["H1", "H2"]
    h1, h2 = SIO_GROUPS
    assert h1.member_indices == (9, 12, 14, 15)
    assert h1.eliminated_class == 15
    assert h1.residual_target == 14
    assert h2.member_indices == (8, 10, 13, 14)
    assert h2.eliminated_class == 14
    assert h2.residual_target == 13


def test_seeded_batch_reaches_bound_strictly():
    for i in range(60):
        rng = np.random.default_rng(3000 + i)
        s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15), rng)
        out = reduce_qutrit_sio(s)
        assert out.op_count_after <= REGIME_BOUNDS[QUTRIT_SIO15]
        assert out.choi_distance <= 1e-9
        assert out.all_incoherent
        assert out.strictly_incoherent


def test_generic_batch_lands_on_thirteen_classes():
    rng = np.random.default_rng(96)
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15), rng)
    out = reduce_qutrit_sio(s)
    assert out.op_count_after == 13
    assert set(classify(out.result, QUTRIT_SIO15)) == set(range(1, 14))


@pytest.mark.parametrize("group", SIO_GROUPS, ids=lambda g: g.name)
def test_isolated_group_certifies(group):
    for i in range(15):
        rng = np.random.default_rng(abs(hash((group.name, i))) % 2**32)
        s = sample_channel(
            SamplerConfig(regime=QUTRIT_SIO15, active_classes=family_ids(group)), rng
        )
        out, route = run_merge_group(s, group, QUTRIT_SIO15)
        assert route in ("closed-form", "engine")
        assert len(out) == len(s) - 1
        assert channels_equal(s, out)[1] <= 1e-9
        for sig in (op for op in out.ops):
            assert np.max(np.abs(sig)) > 0


def test_real_coefficient_family_takes_closed_form():
    # With all coefficients real the phase alignment the closed form
    # assumes holds exactly, so the engine is never needed.
    group = SIO_GROUPS[0]
    hits = 0
    for i in range(5):
        rng = np.random.default_rng(400 + i)
        s = sample_channel(
            SamplerConfig(regime=QUTRIT_SIO15, active_classes=family_ids(group)), rng
        )
        real = KrausSet.from_ops([np.abs(op).astype(complex) for op in s.ops])
        out, route = run_merge_group(real, group, QUTRIT_SIO15)
        assert channels_equal(real, out)[1] <= 1e-9
        hits += route == "closed-form"
    assert hits == 5


def test_generic_family_needs_engine():
    group = SIO_GROUPS[1]
    routes = set()
    for i in range(5):
        rng = np.random.default_rng(500 + i)
        s = sample_channel(
            SamplerConfig(regime=QUTRIT_SIO15, active_classes=family_ids(group)), rng
        )
        _, route = run_merge_group(s, group, QUTRIT_SIO15)
        routes.add(route)
    assert routes == {"engine"}


def test_sio_triple_closed_form_is_unitary():
    rng = np.random.default_rng(97)
    for _ in range(20):
        a2, a3 = rng.normal(), rng.normal()
        b1 = rng.normal() + 1j * rng.normal()
        b2 = rng.normal() + 1j * rng.normal()
        u = closed_form_unitary_sio_triple(b1, a2, b2, a3)
        assert u is not None
        assert np.max(np.abs(u @ u.conj().T - np.eye(3))) < 1e-9


def test_single_pass_suffices():
    rng = np.random.default_rng(98)
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15), rng)
    out = reduce_qutrit_sio(s)
    merge_passes = {step.pass_index for step in out.log if step.route != "noop"}
    assert merge_passes == {0}


def test_rejects_merely_incoherent_input():
    # Class 11 of the full qutrit table has two entries in one row, so it
    # is incoherent but not strictly incoherent.
    m = np.zeros((3, 3), dtype=complex)
    m[0, 0] = 1 / np.sqrt(2)
    m[0, 1] = 1 / np.sqrt(2)
    with pytest.raises(ValueError):
        reduce_qutrit_sio(KrausSet.from_ops([m]))


def test_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        reduce_qutrit_sio(KrausSet.from_ops([np.eye(2, dtype=complex)]))


def test_force_fallback_matches_default_count():
    rng = np.random.default_rng(99)
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15), rng)
    out = reduce_qutrit_sio(s, force_fallback=True)
    assert out.op_count_after <= 13
    assert out.choi_distance <= 1e-9
    assert all(step.route != "closed-form" for step in out.log)
