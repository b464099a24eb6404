import math

import pytest

from ttstoch.core import Player, RallyModel, ScoringSystem
from ttstoch.match import MatchQuery, match_duration_moments, match_win_prob
from ttstoch.oracle import (
    RallyCapExceeded,
    SimConfig,
    dp_set_table,
    simulate_match,
    simulate_set,
    tie_level_value,
)
from ttstoch.setstats import duration_moments, set_win_probs

A, B = Player.A, Player.B


def cfg(m, n, pa, pb, trials=20_000, seed=1, G=1, **kw):
    return SimConfig(trials, seed, ScoringSystem(m, n, G), RallyModel.server(pa, pb), **kw)


def test_deterministic():
    c = cfg(2, 11, 0.55, 0.4, trials=150_000, seed=42)
    assert simulate_set(c).to_dict() == simulate_set(c).to_dict()
    assert simulate_set(c).to_dict() != simulate_set(cfg(2, 11, 0.55, 0.4, trials=150_000, seed=43)).to_dict()


def test_workers_do_not_change_results():
    one = simulate_set(cfg(5, 21, 0.3, 0.2, trials=250_000, seed=3))
    many = simulate_set(cfg(5, 21, 0.3, 0.2, trials=250_000, seed=3, workers=4))
    assert one.to_dict() == many.to_dict()


def test_whitewash_counts_are_exact():
    s = simulate_set(cfg(5, 21, 1.0, 0.0, trials=1000))
    assert s.wins_a == 1000 and s.duration_histogram == {21: 1000}
    assert s.final_score_histogram == {(21, 0): 1000}
    m = simulate_match(cfg(5, 21, 1.0, 0.0, trials=500, G=3))
    assert m.wins_a == 500 and m.duration_histogram == {63: 500}
    assert m.final_score_histogram == {(3, 0): 500}


def test_rally_cap():
    with pytest.raises(RallyCapExceeded):
        simulate_set(cfg(1, 2, 1.0, 1.0, trials=10, rally_cap=200))


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(2, 11, 0.5, 0.5, trials=0)
    with pytest.raises(ValueError):
        cfg(2, 11, 0.5, 0.5, seed=-1)


@pytest.mark.parametrize("m,n,pa,pb,first", [(2, 11, 0.6, 0.45, A), (4, 11, 0.7, 0.4, B), (1, 3, 0.3, 0.3, A)])
def test_set_agrees_with_exact(m, n, pa, pb, first):
    trials = 200_000
    c = cfg(m, n, pa, pb, trials=trials, seed=5, first_server=first)
    s = simulate_set(c)
    w = set_win_probs(c.system, c.model, first)[0]
    assert abs(s.win_rate - w) < 3 * math.sqrt(w * (1 - w) / trials)
    mean, var = duration_moments(c.system, c.model, first)
    assert abs(s.mean_duration - mean) < 3 * math.sqrt(var / trials)


def test_serve_tallies_recover_parameters():
    trials = 100_000
    s = simulate_set(cfg(2, 11, 0.62, 0.47, trials=trials, seed=9))
    for player, p in ((A, 0.62), (B, 0.47)):
        won, served = s.serve_tallies[player]
        assert abs(won / served - p) < 3 * math.sqrt(p * (1 - p) / served)
    total = sum(s.serve_tallies[p][1] for p in (A, B))
    assert total == sum(d * c for d, c in s.duration_histogram.items())


def test_match_agrees_with_exact():
    trials = 200_000
    c = cfg(5, 21, 0.5, 0.5, trials=trials, seed=11, G=3)
    s = simulate_match(c)
    query = MatchQuery(c.system, c.model)
    mean, var = match_duration_moments(query)
    assert abs(s.mean_duration - mean) < 3 * math.sqrt(var / trials)
    w = match_win_prob(query)
    assert abs(s.win_rate - w) < 3 * math.sqrt(w * (1 - w) / trials)
    assert set(s.final_score_histogram) <= {(3, 0), (3, 1), (3, 2), (0, 3), (1, 3), (2, 3)}


@pytest.mark.parametrize("m", [1, 2, 5])
@pytest.mark.parametrize("first", [A, B])
def test_dp_forward_mass(m, first):
    system = ScoringSystem(m, 11)
    table = dp_set_table(system, RallyModel.server(0.63, 0.28), first)
    for absorbed, live in zip(table.absorbed_by_rally, table.live_by_rally):
        assert absorbed + live == pytest.approx(1.0, abs=1e-14)
    x = 0.63 if first is A else 1 - 0.28
    assert table.reach(1, 0) == pytest.approx(x, abs=1e-15)


def test_tie_level_value():
    assert tie_level_value(0.5, 0.5) == 0.5
    assert tie_level_value(0.6, 0.6) == pytest.approx(0.36 / 0.52, abs=1e-15)
    assert math.isnan(tie_level_value(1.0, 0.0))
