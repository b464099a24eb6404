"""Exact probability engine for games under the (m, n, G) scoring system."""

__version__ = "0.1.0"

from .core import Phase, Player, RallyModel, ScoreState, ScoringSystem, swap_roles, validate
from .combinatorics import ScoreEventQuery, component_prob, index_range, no_server_score_prob, score_prob
from .tie import tie_extra_duration_pmf, tie_extra_moments, tie_win_probs
from .setstats import (
    duration_moments,
    duration_pmf,
    final_score_distribution,
    set_win_probs,
    win_prob_from_score,
)
from .match import MatchQuery, compare_systems, match_duration_moments, match_duration_pmf, match_win_prob

__all__ = [
    "Phase",
    "Player",
    "RallyModel",
    "ScoreState",
    "ScoringSystem",
    "swap_roles",
    "validate",
    "ScoreEventQuery",
    "component_prob",
    "index_range",
    "no_server_score_prob",
    "score_prob",
    "tie_extra_duration_pmf",
    "tie_extra_moments",
    "tie_win_probs",
    "duration_moments",
    "duration_pmf",
    "final_score_distribution",
    "set_win_probs",
    "win_prob_from_score",
    "MatchQuery",
    "compare_systems",
    "match_duration_moments",
    "match_duration_pmf",
    "match_win_prob",
]
