"""Joint construction and validation of the factorized input law."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cicregions import (
    AuxFactorization,
    ChannelSpec,
    ConfigurationError,
    JointPmf,
    VariableRoster,
    compose,
    cond_mutual_info,
    marginalize,
    parse_mi_label,
    random_instance,
)
from cicregions.probability import CANONICAL_ORDER, validate


def test_canonical_order_is_the_nine_variable_roster(inst_a_joint):
    assert inst_a_joint.names == CANONICAL_ORDER
    assert CANONICAL_ORDER == ("Q", "U1p", "U1c", "U2c", "U2p", "X1", "X2", "Y1", "Y2")


def test_compose_is_a_distribution(inst_a_joint):
    assert validate(inst_a_joint) is None
    assert inst_a_joint.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(inst_a_joint.probs >= 0)


def test_validate_flags_negative_mass():
    roster = VariableRoster(("A", "B"), (2, 2))
    probs = np.array([[0.6, 0.5], [-0.1, 0.0]])
    msg = validate(JointPmf(roster, probs))
    assert msg is not None
    assert "negative mass" in msg
    assert "A=1,B=0" in msg


def test_validate_flags_bad_total():
    roster = VariableRoster(("A",), (2,))
    msg = validate(JointPmf(roster, np.array([0.5, 0.49])))
    assert msg is not None and "sums to" in msg


def test_conditional_row_diagnostic_names_factor_and_row():
    # p(u1c|q) with the q=0 row summing to 0.98 must be reported verbatim.
    with pytest.raises(ConfigurationError) as err:
        AuxFactorization(
            p_q=np.array([1.0]),
            p_u1p=np.array([[0.5, 0.5]]),
            p_u1c=np.array([[0.49, 0.49]]),
            p_x1=np.full((1, 2, 2, 2), 0.5),
            p_u2c=np.full((1, 2, 2, 2), 0.5),
            p_u2p=np.full((1, 2, 2, 2), 0.5),
            p_x2=np.full((1, 2, 2, 2), 0.5),
        )
    assert str(err.value) == "factor p(u1c|q), row q=0 sums to 0.98"


def test_conditional_negative_entry_diagnostic():
    with pytest.raises(ConfigurationError, match="negative entry"):
        ChannelSpec(table=np.array([[[[1.2, -0.2], [0.0, 0.0]],
                                     [[0.5, 0.5], [0.0, 0.0]]]] * 2).reshape(2, 2, 2, 2))


def test_channel_must_be_four_dimensional():
    with pytest.raises(ConfigurationError, match="4-dimensional"):
        ChannelSpec(table=np.full((2, 2, 2), 0.5))


def test_marginal_recovers_time_sharing_law(inst_a_config, inst_a_joint):
    m = marginalize(inst_a_joint, ("Q",))
    assert np.allclose(m.probs, inst_a_config.aux.p_q, atol=1e-12)


def test_marginal_recovers_private_auxiliary(inst_a_config, inst_a_joint):
    m = marginalize(inst_a_joint, ("Q", "U1p"))
    expect = inst_a_config.aux.p_q[:, None] * inst_a_config.aux.p_u1p
    assert np.allclose(m.probs, expect, atol=1e-12)


def test_marginalize_normalizes_variable_order(inst_a_joint):
    # the keep list may come in any order; the marginal follows the
    # parent roster so equal-set marginals always align axis-for-axis
    m = marginalize(inst_a_joint, ("Y2", "Q", "X1"))
    assert m.names == ("Q", "X1", "Y2")
    assert m.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_factorization_conditional_independences(inst_a_joint):
    # x2 is generated from (q, u2c, u2p) only, and the user-2 auxiliaries
    # are drawn independently of each other given the shared context.
    assert cond_mutual_info(
        inst_a_joint, parse_mi_label("I(X2;U1p,U1c|Q,U2c,U2p)")) <= 1e-12
    assert cond_mutual_info(
        inst_a_joint, parse_mi_label("I(U2p;U2c|Q,U1c,U1p)")) <= 1e-12


def test_channel_sees_only_the_inputs(inst_a_joint):
    assert cond_mutual_info(
        inst_a_joint, parse_mi_label("I(Y1,Y2;Q,U1p,U1c,U2c,U2p|X1,X2)")) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=1, max_value=3))
def test_random_instances_compose_to_distributions(seed, q_card):
    cfg = random_instance(np.random.default_rng(seed), q_card=q_card)
    joint = compose(cfg.channel, cfg.aux)
    assert validate(joint) is None
    assert joint.probs.shape[0] == q_card


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_marginalization_is_consistent_across_orders(seed):
    cfg = random_instance(np.random.default_rng(seed))
    joint = compose(cfg.channel, cfg.aux)
    a = marginalize(joint, ("X1", "Y1"))
    b = marginalize(joint, ("Y1", "X1"))
    assert a.names == b.names == ("X1", "Y1")
    assert np.array_equal(a.probs, b.probs)


def test_roster_rejects_duplicates_and_bad_cards():
    with pytest.raises(ConfigurationError):
        VariableRoster(("A", "A"), (2, 2))
    with pytest.raises(ConfigurationError):
        VariableRoster(("A",), (0,))
    with pytest.raises(ConfigurationError):
        VariableRoster(("A", "B"), (2,))


def test_pmf_shape_must_match_roster():
    with pytest.raises(ConfigurationError):
        JointPmf(VariableRoster(("A", "B"), (2, 3)), np.full((2, 2), 0.25))
