import pytest
from hypothesis import given, strategies as st

from ttstoch.core import Phase, Player, RallyModel, ScoreState, ScoringSystem, swap_roles, validate

probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def test_old_rules_validate_cleanly():
    report = validate(ScoringSystem(5, 21, 2), RallyModel.server(0.6, 0.5))
    assert report.ok and report.warnings == []


def test_divisibility_warning():
    report = validate(ScoringSystem(4, 11, 3), RallyModel.server(0.6, 0.5))
    assert report.ok
    assert any("mod m" in w for w in report.warnings)
    assert not ScoringSystem(4, 11, 3).m_divides_n_minus_1


def test_degenerate_warning():
    report = validate(ScoringSystem(2, 11), RallyModel.server(1.0, 0.3))
    assert any("degenerate" in w for w in report.warnings)


@pytest.mark.parametrize("args", [(2, 1, 3), (0, 11, 1), (2, 11, 0)])
def test_invalid_systems(args):
    with pytest.raises(ValueError):
        ScoringSystem(*args)


@pytest.mark.parametrize("pa,pb", [(-0.1, 0.5), (0.5, 1.2)])
def test_probabilities_outside_unit_interval(pa, pb):
    with pytest.raises(ValueError):
        RallyModel.server(pa, pb)


def test_n_equal_two_allowed():
    assert ScoringSystem(1, 2).tie_rallies == 2


def test_swap_roles_examples():
    assert swap_roles(RallyModel.server(0.7, 0.5)) == RallyModel.server(0.5, 0.7)
    swapped = swap_roles(RallyModel.no_server(0.6))
    assert not swapped.server_dependent
    assert swapped.p == pytest.approx(0.4, abs=1e-15)
    m = RallyModel.server(0.3, 0.9)
    assert swap_roles(swap_roles(m)) == m


@given(probs, probs)
def test_swap_is_involution(pa, pb):
    m = RallyModel.server(pa, pb)
    assert swap_roles(swap_roles(m)) == m


@given(probs)
def test_no_server_sums_to_one_exactly(p):
    m = RallyModel.no_server(p)
    assert m.p_a + m.p_b == 1.0
    assert m.p == p


def test_is_degenerate():
    assert RallyModel.server(0.0, 0.5).is_degenerate
    assert not RallyModel.server(0.2, 0.5).is_degenerate


def test_validate_is_pure():
    s, m = ScoringSystem(4, 11), RallyModel.server(0.0, 1.0)
    assert validate(s, m) == validate(s, m)
    assert s == ScoringSystem(4, 11) and m == RallyModel.server(0.0, 1.0)


def test_player_other_is_involution():
    for p in Player:
        assert p.other().other() is p
    assert Player.parse("b") is Player.B
    with pytest.raises(ValueError):
        Player.parse("C")


def test_score_state_checks():
    s = ScoringSystem(2, 11)
    ScoreState(10, 3).check(s)
    ScoreState(11, 10, Phase.TIE).check(s)
    with pytest.raises(ValueError):
        ScoreState(12, 10, Phase.TIE).check(s)
    with pytest.raises(ValueError):
        ScoreState(11, 11, Phase.PRE_TIE).check(s)
    assert ScoreState(11, 9).is_terminal(s)
    assert not ScoreState(11, 10).is_terminal(s)
    assert ScoreState(13, 11).is_terminal(s)
