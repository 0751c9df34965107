"""Constraint systems for both bound families, gaps, and identity checks.

Numeric pins were produced by an independent reference evaluation of the
worked instance (binary auxiliaries, xor/copy couplings with 10% noise,
4-ary inputs through a 5% symbol flip) and are trusted to 1e-12 unless a
looser tolerance is stated.
"""

import numpy as np
import pytest

from cicregions import (
    CHANGED_SUFFIXES,
    added_term_value,
    build_system,
    compose,
    cond_mutual_info,
    constraint_gap,
    exponent_identity_check,
    parse_mi_label,
    random_instance,
    system_from_dict,
    system_to_dict,
)
from cicregions.probability import AuxFactorization, ChannelSpec
from cicregions.config import InstanceConfig
from cicregions.regions import RATE_VARS, RateVector

ALL_SUFFIXES = tuple(range(1, 17))

# Worked-instance right-hand sides, frozen from the reference evaluation.
INST_A_RHS = {
    "3.1": 0.5310044064107187,
    "3.2": 0.5310044064107187,
    "3.3": 0.9037453613194888,
    "3.4": 0.9037453613194879,
    "3.5": 0.5310044064107187,
    "3.6": 1.713584441709025,
    "3.9": 2.165359324258705,
    "3.10": 0.9037453613194888,
    "3.11": 0.8451972181665184,
    "3.12": 0.5310044064107196,
    "3.14": 1.376201624577237,
    "3.16": 2.1653593242587057,
}


def _rand_pair(seed, q_card=1):
    cfg = random_instance(np.random.default_rng(seed), q_card=q_card)
    joint = compose(cfg.channel, cfg.aux)
    return joint, build_system("dmt", joint), build_system("corrected", joint)


def test_both_systems_carry_sixteen_tagged_bounds(dmt_a, corrected_a):
    assert sorted(q.id for q in dmt_a.inequalities if not q.id.startswith("nonneg")) == \
        sorted(f"2.{k}" for k in ALL_SUFFIXES)
    assert sorted(q.id for q in corrected_a.inequalities if not q.id.startswith("nonneg")) == \
        sorted(f"3.{k}" for k in ALL_SUFFIXES)


def test_nonnegativity_rows_cover_all_six_rates(dmt_a):
    ids = {q.id for q in dmt_a.inequalities if q.id.startswith("nonneg")}
    assert ids == {f"nonneg:{v}" for v in RATE_VARS}


def test_senses_lower_bound_only_the_binning_overheads(corrected_a):
    for q in corrected_a.inequalities:
        if q.id in ("3.1", "3.2"):
            assert q.sense == ">="
        elif q.id.startswith("3."):
            assert q.sense == "<="


def test_worked_instance_pinned_rhs(corrected_a):
    for sid, want in INST_A_RHS.items():
        assert corrected_a.rhs(sid) == pytest.approx(want, abs=1e-12), sid


def test_all_rhs_finite_and_nonnegative():
    _, dmt, corr = _rand_pair(404, q_card=2)
    for system, prefix in ((dmt, "2"), (corr, "3")):
        for k in ALL_SUFFIXES:
            v = system.rhs(f"{prefix}.{k}")
            assert np.isfinite(v) and v >= 0.0


def test_corrected_bounds_never_tighter():
    for seed in (11, 12, 13):
        _, dmt, corr = _rand_pair(seed, q_card=1 + seed % 2)
        for k in ALL_SUFFIXES:
            assert corr.rhs(f"3.{k}") >= dmt.rhs(f"2.{k}") - 1e-12


def test_gap_is_exactly_the_added_term():
    joint, dmt, corr = _rand_pair(77, q_card=2)
    gaps = constraint_gap(dmt, corr)
    assert sorted(gaps) == sorted(f"3.{k}" for k in ALL_SUFFIXES)
    for sid, gap in gaps.items():
        k = int(sid.split(".")[1])
        if k in CHANGED_SUFFIXES:
            assert gap == pytest.approx(added_term_value(joint, sid), abs=1e-12), sid
        else:
            assert gap == pytest.approx(0.0, abs=1e-12), sid


def test_worked_instance_gap_profile(dmt_a, corrected_a):
    # Only three of the seven rewritten bounds actually move here, all by
    # the same cross-auxiliary information value.
    gaps = constraint_gap(dmt_a, corrected_a)
    moved = {sid for sid, g in gaps.items() if abs(g) > 1e-12}
    assert moved == {"3.9", "3.14", "3.16"}
    for sid in moved:
        assert gaps[sid] == pytest.approx(0.5310044064107187, abs=1e-9)


def test_unchanged_suffixes_are_the_other_nine():
    assert CHANGED_SUFFIXES == frozenset({7, 8, 9, 13, 14, 15, 16})
    assert len(set(ALL_SUFFIXES) - CHANGED_SUFFIXES) == 9


def test_common_rate_bound_decomposes_by_chain_rule(inst_a_joint, corrected_a):
    # rhs(3.7) must equal the two-step decoding budget: the channel part
    # plus the full cross information carried by the cognitive auxiliary.
    want = (cond_mutual_info(inst_a_joint, parse_mi_label("I(Y1;U1p,U2c|U1c,Q)"))
            + cond_mutual_info(inst_a_joint, parse_mi_label("I(U2c;U1p,U1c|Q)")))
    assert corrected_a.rhs("3.7") == pytest.approx(want, abs=1e-9)


def test_rewritten_common_bound_adds_private_cross_information():
    joint, dmt, corr = _rand_pair(2024)
    extra = cond_mutual_info(joint, parse_mi_label("I(U2c;U1p|Q)"))
    assert corr.rhs("3.7") - dmt.rhs("2.7") == pytest.approx(extra, abs=1e-9)


def _independent_aux_instance():
    """User-2 auxiliaries drawn without looking at user 1's."""
    p_u2c = np.tile(np.array([0.3, 0.7]), (1, 2, 2, 1))
    p_u2p = np.tile(np.array([0.8, 0.2]), (1, 2, 2, 1))
    p_x = np.zeros((1, 2, 2, 4))
    for a in range(2):
        for b in range(2):
            p_x[0, a, b, 2 * a + b] = 1.0
    flip = np.full((4, 4), 0.05 / 3)
    np.fill_diagonal(flip, 0.95)
    channel = np.einsum("xy,wz->xwyz", flip, flip)
    aux = AuxFactorization(
        p_q=np.array([1.0]),
        p_u1p=np.array([[0.5, 0.5]]),
        p_u1c=np.array([[0.5, 0.5]]),
        p_x1=p_x,
        p_u2c=p_u2c,
        p_u2p=p_u2p,
        p_x2=p_x,
    )
    return InstanceConfig(aux=aux, channel=ChannelSpec(table=channel))


def test_independent_auxiliaries_collapse_the_correction():
    cfg = _independent_aux_instance()
    joint = compose(cfg.channel, cfg.aux)
    dmt = build_system("dmt", joint)
    corr = build_system("corrected", joint)
    assert corr.rhs("3.1") == pytest.approx(0.0, abs=1e-12)
    assert corr.rhs("3.2") == pytest.approx(0.0, abs=1e-12)
    for gap in constraint_gap(dmt, corr).values():
        assert abs(gap) <= 1e-12


def test_identity_report_on_worked_instance(inst_a_joint):
    report = exponent_identity_check(inst_a_joint)
    assert report.all_ok
    assert len(report.entries) == 7
    assert report.max_residual <= 1e-12
    ids = [e.constraint_id for e in report.entries]
    assert sorted(ids) == ["3.13", "3.14", "3.15", "3.16", "3.7", "3.8", "3.9"]
    assert any(e.note for e in report.entries)
    for e in report.entries:
        assert e.residual == abs(e.exponent_bits - e.bound_bits)


def test_identity_residuals_on_random_instances():
    for seed in (5, 6, 7):
        cfg = random_instance(np.random.default_rng(seed), q_card=1 + seed % 2)
        report = exponent_identity_check(compose(cfg.channel, cfg.aux))
        assert report.max_residual <= 1e-9


def test_build_is_deterministic(inst_a_joint):
    a = build_system("corrected", inst_a_joint)
    b = build_system("corrected", inst_a_joint)
    for q in a.inequalities:
        assert b.rhs(q.id) == q.rhs


def test_system_round_trips_through_dict(corrected_a):
    doc = system_to_dict(corrected_a)
    back = system_from_dict(doc)
    assert [q.id for q in back.inequalities] == [q.id for q in corrected_a.inequalities]
    for q in corrected_a.inequalities:
        assert back.rhs(q.id) == q.rhs
        restored = next(r for r in back.inequalities if r.id == q.id)
        assert restored.sense == q.sense
        assert restored.coeffs == q.coeffs


def test_rate_vector_dict_order():
    rv = RateVector(0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    assert tuple(rv.as_dict()) == RATE_VARS
    assert rv.as_dict()["Rp2p"] == 0.6


def test_unknown_bound_id_raises(corrected_a):
    with pytest.raises(Exception):
        corrected_a.rhs("3.99")
