"""Single-player optimization: top-up contributions, link gains, best responses."""

import math

import numpy as np
import pytest

from netpublic import (
    ADD,
    DELETE,
    BenefitSpec,
    GameParams,
    StrategyProfile,
    best_response,
    construct_independent,
    find_profitable_deviation,
    gains_from_link,
    optimal_contributions,
    sample_types,
    utility,
    UNIFORM,
)
from tests.conftest import random_scenario


def _params(types, c=1.0, k=0.4, spec=None):
    return GameParams(np.asarray(types, float), c, k, spec or BenefitSpec.log())


def test_optimal_contributions_no_links_is_isolation():
    params = _params([0.0, 0.5, 1.0])
    prof = StrategyProfile.isolated(params)
    assert optimal_contributions(1, [], prof, params) == (0.5, 0.5)


def test_optimal_contributions_free_rides_when_covered():
    params = _params([0.0, 0.5, 1.0])
    prof = StrategyProfile.isolated(params)
    prof.x[2], prof.y[2] = 1.0, 0.0
    assert optimal_contributions(1, [2], prof, params) == (0.0, 0.5)


def test_optimal_contributions_boundary_exact_coverage():
    params = _params([0.0, 0.5, 1.0])
    prof = StrategyProfile.isolated(params)
    prof.x[2], prof.y[2] = 0.5, 0.5
    assert optimal_contributions(1, [2], prof, params) == (0.0, 0.0)


def test_gains_from_link_closed_form_cross_check():
    # isolated taste-0.9 player linking the full x specialist:
    # gain = c*x_hat_p + t_p*(f(x_hat_1) - f(x_hat_p))
    params = _params([0.0, 0.9, 1.0], k=0.994)
    prof = StrategyProfile.isolated(params)
    prof.y[2] = 0.0
    expected = 1.0 * 0.9 + 0.9 * (math.log(1.0) - math.log(0.9))
    got = gains_from_link(prof, 1, 2, ADD, params)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(0.9948244644, abs=1e-9)


def test_gains_from_link_zero_provider():
    params = _params([0.0, 0.5, 1.0])
    prof = StrategyProfile.isolated(params)
    prof.x[0], prof.y[0] = 0.0, 0.0
    assert gains_from_link(prof, 1, 0, ADD, params) == pytest.approx(0.0, abs=1e-12)


def test_gains_add_delete_symmetry(rng):
    for _ in range(25):
        params = random_scenario(rng, 5)
        prof = StrategyProfile.isolated(params)
        i, j = rng.choice(5, size=2, replace=False)
        i, j = int(i), int(j)
        gl_add = gains_from_link(prof, i, j, ADD, params)
        xi, yi = optimal_contributions(i, [j], prof, params)
        prof.set_strategy(i, [j], xi, yi)
        gl_del = gains_from_link(prof, i, j, DELETE, params)
        assert gl_add == pytest.approx(gl_del, abs=1e-9)


def test_gains_invariant_to_target_links(rng):
    params = random_scenario(rng, 6)
    prof = StrategyProfile.isolated(params)
    before = gains_from_link(prof, 1, 3, ADD, params)
    prof.g[3, 5] = 1  # target's own links carry no provision
    after = gains_from_link(prof, 1, 3, ADD, params)
    assert before == after


def test_gains_preconditions():
    params = _params([0.0, 0.5, 1.0])
    prof = StrategyProfile.isolated(params)
    with pytest.raises(IndexError):
        gains_from_link(prof, 1, 1, ADD, params)
    with pytest.raises(ValueError):
        gains_from_link(prof, 1, 2, DELETE, params)
    prof.g[1, 2] = 1
    with pytest.raises(ValueError):
        gains_from_link(prof, 1, 2, ADD, params)


def test_best_response_isolation_when_links_too_dear():
    params = _params([0.0, 0.5, 1.0], k=5.0)
    prof = StrategyProfile.isolated(params)
    prof.x[:] = 0.0
    prof.y[:] = 0.0
    br = best_response(1, prof, params, "exact")
    assert br.links == ()
    assert (br.x, br.y) == (0.5, 0.5)


def test_best_response_links_both_specialists():
    params = _params([0.0, 0.5, 1.0], k=0.5)
    prof = StrategyProfile.isolated(params)
    prof.x[0], prof.y[0] = 0.0, 1.0
    prof.x[2], prof.y[2] = 1.0, 0.0
    br = best_response(1, prof, params, "exact")
    assert br.links == (0, 2)
    assert (br.x, br.y) == (0.0, 0.0)
    assert br.utility == pytest.approx(-1.0, abs=1e-12)


def test_best_response_satisfies_consumption_floor(rng):
    # consumption covers isolation demand per good, exactly when active
    for _ in range(20):
        params = random_scenario(rng, 6)
        prof = StrategyProfile.isolated(params)
        for i in range(6):
            br = best_response(i, prof, params, "exact")
            x_bar = float(prof.x[list(br.links)].sum())
            y_bar = float(prof.y[list(br.links)].sum())
            assert br.x + x_bar >= params.x_hat[i] - 1e-9
            assert br.y + y_bar >= params.y_hat[i] - 1e-9
            if br.x > 0:
                assert br.x + x_bar == pytest.approx(params.x_hat[i], abs=1e-9)
            if br.y > 0:
                assert br.y + y_bar == pytest.approx(params.y_hat[i], abs=1e-9)


def test_best_response_beats_random_alternatives(rng):
    params = random_scenario(rng, 7)
    prof = StrategyProfile.isolated(params)
    prof.x[3], prof.y[3] = 1.0, 1.0
    br = best_response(2, prof, params, "exact")
    trial = prof.copy()
    for _ in range(100):
        targets = [j for j in range(7) if j != 2 and rng.random() < 0.4]
        xi, yi = rng.uniform(0.0, 2.0, size=2)
        trial.set_strategy(2, targets, float(xi), float(yi))
        assert utility(trial, 2, params) <= br.utility + 1e-9


def test_structural_mode_tracks_exact(rng):
    hits = total = 0
    for _ in range(100):
        params = random_scenario(rng, int(rng.integers(5, 11)))
        prof = StrategyProfile.isolated(params)
        # realistic state: one greedy pass of exact responses
        for i in range(params.n):
            br = best_response(i, prof, params, "exact")
            if br.utility > utility(prof, i, params):
                prof.set_strategy(i, br.links, br.x, br.y)
        for i in range(params.n):
            exact = best_response(i, prof, params, "exact")
            struct = best_response(i, prof, params, "structural")
            assert struct.utility <= exact.utility + 1e-9
            total += 1
            if abs(struct.utility - exact.utility) <= 1e-9:
                hits += 1
    assert hits / total >= 0.95


def test_exact_mode_rejects_large_games():
    types = sample_types(UNIFORM, 17, seed=1)
    params = GameParams(types, 1.0, 0.4, BenefitSpec.log())
    prof = StrategyProfile.isolated(params)
    with pytest.raises(ValueError):
        best_response(0, prof, params, "exact")


def test_no_deviation_from_constructed_equilibrium(rng):
    for _ in range(10):
        params = random_scenario(rng, 6)
        prof = construct_independent(params)
        assert find_profitable_deviation(prof, params, "exact") is None


def test_deviation_found_when_links_are_cheap():
    params = _params([0.0, 0.5, 1.0], k=0.01)
    prof = StrategyProfile.isolated(params)
    dev = find_profitable_deviation(prof, params, "exact")
    assert dev is not None
    assert dev.new_links


def test_deviation_found_for_zero_contributions():
    params = _params([0.0, 0.5, 1.0], k=5.0)
    prof = StrategyProfile.isolated(params)
    prof.x[:] = 0.0
    prof.y[:] = 0.0
    dev = find_profitable_deviation(prof, params, "exact")
    assert dev is not None
    assert dev.player == 0
    assert dev.new_links == ()
    assert dev.new_y == pytest.approx(params.y_hat[0], abs=1e-12)
