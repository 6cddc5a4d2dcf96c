"""Equilibrium construction, verification, and classification.

The constructive routine anchors the extreme types first and then lets the
remaining isolated players attach to successively less extreme anchors while
a link pays for itself.  Two-player-core templates cover the collaborative
variants.  Verification is a best-response scan; classification reads the
network structure: contributors are exactly the players receiving links.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .best_response import (
    EXACT,
    STRUCTURAL,
    Deviation,
    best_response,
    find_profitable_deviation,
    optimal_contributions,
)
from .metrics import welfare
from .model import EPS_DEV, GameParams, StrategyProfile, utility

EMPTY = "Empty"
INDEPENDENT = "Independent"
COLLABORATIVE = "Collaborative"
PARTIALLY_COLLABORATIVE = "PartiallyCollaborative"
NON_EQUILIBRIUM = "NonEquilibrium"
STRUCTURE_VIOLATION = "StructureViolation"

ROUND_ROBIN = "round_robin"
RANDOM_PERMUTATION = "random_permutation"

_FIXED_POINT_TOL = 1e-10
_FIXED_POINT_MAX_SWEEPS = 10_000
_WELFARE_TIE_TOL = 1e-9
_DYNAMICS_STARTS = 8


class NonConvergenceError(RuntimeError):
    """An iterative routine hit its round budget or cycled."""


@dataclass
class EquilibriumReport:
    classification: str
    contributors: tuple[int, ...]
    periphery: tuple[int, ...]
    isolated: tuple[int, ...]
    violations: list[Deviation] = field(default_factory=list)
    note: str = ""


@dataclass(frozen=True)
class DynamicsConfig:
    max_rounds: int = 60
    order: str = ROUND_ROBIN
    seed: int = 0
    mode: str = EXACT

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")


# ----------------------------------------------------------------------
# gains against isolated providers, and the empty-network threshold
# ----------------------------------------------------------------------

def _gl_matrix(params: GameParams) -> np.ndarray:
    """GL[i, j]: i's gross gain from linking j on the empty network.

    Everyone sits at their isolation demand, so the gain has a closed form:
    the saved own provision (capped at what j supplies) plus the benefit jump
    on any good where j out-provides i.
    """
    xh, yh = params.x_hat, params.y_hat
    t = params.types
    spec = params.benefit
    fx = spec.value(xh)  # -inf where xh == 0; those rows carry zero weight
    fy = spec.value(yh)
    ci = params.cost_vec[:, None]
    save = ci * (np.minimum.outer(xh, xh) + np.minimum.outer(yh, yh))
    with np.errstate(invalid="ignore"):
        gain_x = np.where(
            t[:, None] > 0.0,
            t[:, None] * np.maximum(fx[None, :] - fx[:, None], 0.0),
            0.0,
        )
        gain_y = np.where(
            t[:, None] < 1.0,
            (1.0 - t[:, None]) * np.maximum(fy[None, :] - fy[:, None], 0.0),
            0.0,
        )
    gl = save + gain_x + gain_y
    np.fill_diagonal(gl, -np.inf)
    return gl


def k_tilde(params: GameParams) -> float:
    """Largest gross link gain anywhere on the empty network.

    The empty network is the unique equilibrium exactly when k exceeds this.
    """
    return float(np.max(_gl_matrix(params)))


def _gl_to_provider(
    p: int, x_prov: float, y_prov: float, params: GameParams
) -> float:
    """Gross gain for isolated p from linking a provider of (x_prov, y_prov)."""
    t = params.types[p]
    spec = params.benefit
    xh = params.x_hat[p]
    yh = params.y_hat[p]
    gain = params.cost_vec[p] * (min(xh, x_prov) + min(yh, y_prov))
    if t > 0.0 and x_prov > xh:
        gain += t * float(spec.value(x_prov) - spec.value(xh))
    if t < 1.0 and y_prov > yh:
        gain += (1.0 - t) * float(spec.value(y_prov) - spec.value(yh))
    return gain


# ----------------------------------------------------------------------
# constructive equilibria
# ----------------------------------------------------------------------

def construct_independent(params: GameParams) -> StrategyProfile:
    """Build an equilibrium where contributors sponsor no links.

    Above the empty-network threshold this is the empty profile.  Otherwise
    the extreme types are fixed as specialized providers, every player for
    whom those links pay attaches, and the loop then repeatedly turns the
    most extreme remaining isolated player into an anchor and attaches
    whoever profits from linking them.  The greedy pass can leave boundary
    players attached to a worse anchor than one fixed later, so a
    deterministic best-response sweep repairs any residual deviations before
    the profile is returned.
    """
    prof = _greedy_independent(params)
    mode = EXACT if params.n <= 16 else STRUCTURAL
    if find_profitable_deviation(prof, params, mode) is None:
        return prof
    config = DynamicsConfig(max_rounds=60, order=ROUND_ROBIN, mode=mode)
    try:
        return best_response_dynamics(prof, params, config)
    except NonConvergenceError:
        return prof


def _greedy_independent(params: GameParams) -> StrategyProfile:
    n = params.n
    prof = StrategyProfile.isolated(params)
    if params.k > k_tilde(params):
        return prof

    lo, hi = 0, n - 1  # types 0 and 1
    prof.x[hi], prof.y[hi] = params.x_hat[hi], 0.0
    prof.x[lo], prof.y[lo] = 0.0, params.y_hat[lo]

    attached = np.zeros(n, dtype=bool)
    attached[[lo, hi]] = True
    processed = np.zeros(n, dtype=bool)
    processed[[lo, hi]] = True

    for p in range(1, n - 1):
        targets = []
        if _gl_to_provider(p, params.x_hat[hi], 0.0, params) >= params.k:
            targets.append(hi)
        if _gl_to_provider(p, 0.0, params.y_hat[lo], params) >= params.k:
            targets.append(lo)
        if targets:
            xi, yi = optimal_contributions(p, targets, prof, params)
            prof.set_strategy(p, targets, xi, yi)
            attached[p] = True

    extremeness = np.maximum(params.types, 1.0 - params.types)
    while True:
        pending = np.flatnonzero(~attached & ~processed)
        if pending.size == 0:
            break
        # most extreme isolated player; ties resolved toward the lower index
        anchor = int(pending[np.argmax(extremeness[pending])])
        processed[anchor] = True
        prof.x[anchor], prof.y[anchor] = params.x_hat[anchor], params.y_hat[anchor]
        for j in np.flatnonzero(~attached & ~processed):
            gl = _gl_to_provider(int(j), prof.x[anchor], prof.y[anchor], params)
            if gl >= params.k:
                xi, yi = optimal_contributions(int(j), [anchor], prof, params)
                prof.set_strategy(int(j), [anchor], xi, yi)
                attached[j] = True
    return prof


def _attach_to_core(prof: StrategyProfile, core: tuple[int, ...], params: GameParams) -> None:
    """Give every non-core player their best subset of links into the core."""
    core_set = set(core)
    options = []
    for r in range(len(core) + 1):
        options.extend(itertools.combinations(sorted(core_set), r))
    for p in range(params.n):
        if p in core_set:
            continue
        best_u, best_links, best_xy = -np.inf, (), (params.x_hat[p], params.y_hat[p])
        for links in options:
            xi, yi = optimal_contributions(p, list(links), prof, params)
            x_bar = float(prof.x[list(links)].sum())
            y_bar = float(prof.y[list(links)].sum())
            t = params.types[p]
            spec = params.benefit
            bx = t * float(spec.value(xi + x_bar)) if t > 0.0 else 0.0
            by = (1.0 - t) * float(spec.value(yi + y_bar)) if t < 1.0 else 0.0
            u = bx + by - params.cost_vec[p] * (xi + yi) - params.k * len(links)
            if u > best_u + EPS_DEV:
                best_u, best_links, best_xy = u, links, (xi, yi)
        prof.set_strategy(p, list(best_links), *best_xy)


def construct_collaborative(
    params: GameParams, i: int, j: int, mode: str = EXACT
) -> StrategyProfile | None:
    """Two-player core with mutual links, each fully specialized in one good."""
    if not params.types[i] > 0.5 > params.types[j]:
        raise ValueError("need t_i > 1/2 > t_j")
    # each core player must find their own link worth its fee, or the
    # template cannot survive verification
    keep_j = _gl_to_provider(j, params.x_hat[i], 0.0, params)
    keep_i = _gl_to_provider(i, 0.0, params.y_hat[j], params)
    if keep_j < params.k or keep_i < params.k:
        return None
    prof = StrategyProfile.isolated(params)
    prof.set_strategy(i, [j], params.x_hat[i], 0.0)
    prof.set_strategy(j, [i], 0.0, params.y_hat[j])
    _attach_to_core(prof, (i, j), params)
    report = verify_nash(prof, params, mode)
    if report.classification == COLLABORATIVE:
        return prof
    return None


def construct_partially_collaborative(
    params: GameParams, a: int, b: int, mode: str = EXACT
) -> StrategyProfile | None:
    """Two-player core where only b sponsors: a provides its full autarky
    bundle, b free rides on a's x and tops up the y gap."""
    if not params.types[a] > 0.5 > params.types[b]:
        raise ValueError("need t_a > 1/2 > t_b")
    gap = params.y_hat[b] - params.y_hat[a]
    # the top-up must be worth linking to (anyone's best gain from b is c*gap)
    # and b must find the link to a worth keeping
    if params.cost_vec[0] * gap < params.k:
        return None
    if _gl_to_provider(b, params.x_hat[a], params.y_hat[a], params) < params.k:
        return None
    prof = StrategyProfile.isolated(params)
    prof.set_strategy(a, [], params.x_hat[a], params.y_hat[a])
    prof.set_strategy(b, [a], 0.0, gap)
    _attach_to_core(prof, (a, b), params)
    report = verify_nash(prof, params, mode)
    if report.classification == PARTIALLY_COLLABORATIVE:
        return prof
    return None


# ----------------------------------------------------------------------
# contribution fixed point and the small-n oracle
# ----------------------------------------------------------------------

def contribution_fixed_point(g: np.ndarray, params: GameParams) -> tuple[np.ndarray, np.ndarray]:
    """Round-robin top-up iteration on a fixed link graph.

    Raises NonConvergenceError on a detected cycle or when the sweep budget
    is exhausted, which signals that the graph supports no pure contribution
    equilibrium under this dynamic.
    """
    g = np.asarray(g)
    n = params.n
    x = params.x_hat.copy()
    y = params.y_hat.copy()
    seen: set[bytes] = set()
    for _ in range(_FIXED_POINT_MAX_SWEEPS):
        delta = 0.0
        for i in range(n):
            row = g[i]
            xi = max(params.x_hat[i] - float(row @ x), 0.0)
            yi = max(params.y_hat[i] - float(row @ y), 0.0)
            delta = max(delta, abs(xi - x[i]), abs(yi - y[i]))
            x[i], y[i] = xi, yi
        if delta < _FIXED_POINT_TOL:
            return x, y
        key = np.round(np.concatenate([x, y]) / _FIXED_POINT_TOL).tobytes()
        if key in seen:
            raise NonConvergenceError("contribution dynamic revisited a state")
        seen.add(key)
    raise NonConvergenceError("contribution dynamic exhausted its sweep budget")


def brute_force_equilibria(params: GameParams) -> list[StrategyProfile]:
    """Ground truth for tiny games: test every digraph on up to 4 players."""
    n = params.n
    if n > 4:
        raise ValueError("brute force enumeration is limited to n <= 4")
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    out: list[StrategyProfile] = []
    for mask in range(1 << len(pairs)):
        g = np.zeros((n, n), dtype=np.int8)
        for bit, (i, j) in enumerate(pairs):
            if mask >> bit & 1:
                g[i, j] = 1
        try:
            x, y = contribution_fixed_point(g, params)
        except NonConvergenceError:
            continue
        prof = StrategyProfile(x, y, g)
        if find_profitable_deviation(prof, params, EXACT) is None:
            out.append(prof)
    return out


# ----------------------------------------------------------------------
# verification and classification
# ----------------------------------------------------------------------

def _partition(profile: StrategyProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indeg = profile.in_degree()
    outdeg = profile.out_degree()
    contributors = indeg >= 1
    isolated = (indeg == 0) & (outdeg == 0)
    periphery = (indeg == 0) & (outdeg >= 1)
    return contributors, periphery, isolated


def classify(profile: StrategyProfile) -> EquilibriumReport:
    """Label a profile by its network shape.

    Links inside the contributor set force a two-player core (collaborative
    if reciprocated, partially collaborative otherwise).  Without core links
    the network is bipartite and independent; with three or more contributors
    each sponsor may carry only one link.  Shapes a verified equilibrium
    should never produce are reported as structure violations.
    """
    contributors, periphery, isolated = _partition(profile)
    c_idx = tuple(int(v) for v in np.flatnonzero(contributors))
    p_idx = tuple(int(v) for v in np.flatnonzero(periphery))
    i_idx = tuple(int(v) for v in np.flatnonzero(isolated))

    def report(label: str, note: str = "") -> EquilibriumReport:
        return EquilibriumReport(label, c_idx, p_idx, i_idx, [], note)

    if profile.g.sum() == 0:
        return report(EMPTY)

    core_rows = profile.g[np.ix_(list(c_idx), list(c_idx))] if c_idx else np.zeros((0, 0))
    if core_rows.sum() > 0:
        if len(c_idx) != 2:
            return report(
                STRUCTURE_VIOLATION,
                f"links inside a contributor set of size {len(c_idx)}",
            )
        a, b = c_idx
        if profile.g[a, b] and profile.g[b, a]:
            return report(COLLABORATIVE)
        return report(PARTIALLY_COLLABORATIVE)

    if len(c_idx) >= 3:
        outdeg = profile.out_degree()
        heavy = [p for p in p_idx if outdeg[p] > 1]
        if heavy:
            return report(
                STRUCTURE_VIOLATION,
                f"sponsor {heavy[0]} holds {int(outdeg[heavy[0]])} links "
                f"with {len(c_idx)} contributors",
            )
    return report(INDEPENDENT)


def verify_nash(
    profile: StrategyProfile, params: GameParams, mode: str = EXACT
) -> EquilibriumReport:
    """Best-response check; classifies on success, witnesses on failure."""
    deviation = find_profitable_deviation(profile, params, mode)
    if deviation is None:
        return classify(profile)
    contributors, periphery, isolated = _partition(profile)
    return EquilibriumReport(
        NON_EQUILIBRIUM,
        tuple(int(v) for v in np.flatnonzero(contributors)),
        tuple(int(v) for v in np.flatnonzero(periphery)),
        tuple(int(v) for v in np.flatnonzero(isolated)),
        [deviation],
    )


# ----------------------------------------------------------------------
# best-response dynamics and the welfare-maximal equilibrium
# ----------------------------------------------------------------------

def best_response_dynamics(
    start: StrategyProfile, params: GameParams, config: DynamicsConfig
) -> StrategyProfile:
    """Sequential best responses until a full pass changes nothing."""
    prof = start.copy()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    for _ in range(config.max_rounds):
        if config.order == RANDOM_PERMUTATION:
            order = rng.permutation(params.n)
        else:
            order = np.arange(params.n)
        changed = False
        for i in order:
            i = int(i)
            current = utility(prof, i, params)
            br = best_response(i, prof, params, config.mode)
            if br.utility > current + EPS_DEV:
                prof.set_strategy(i, br.links, br.x, br.y)
                changed = True
        if not changed:
            return prof
    raise NonConvergenceError("best-response dynamics did not settle")


def _anchored_start(params: GameParams, quantile: float) -> StrategyProfile:
    """Isolated profile with one pre-seeded anchor near a type quantile.

    Dynamics started from here can discover equilibria whose contributor sits
    in the interior of the type space, which pure greedy play from the empty
    profile never reaches.
    """
    prof = StrategyProfile.isolated(params)
    anchor = int(np.argmin(np.abs(params.types - quantile)))
    for p in range(params.n):
        if p == anchor:
            continue
        gl = _gl_to_provider(p, params.x_hat[anchor], params.y_hat[anchor], params)
        if gl >= params.k:
            xi, yi = optimal_contributions(p, [anchor], prof, params)
            prof.set_strategy(p, [anchor], xi, yi)
    return prof


def _moderate_side_candidates(params: GameParams) -> tuple[list[int], list[int]]:
    t = params.types
    above = [int(i) for i in np.argsort(np.abs(t - 0.5), kind="stable") if t[i] > 0.5]
    below = [int(i) for i in np.argsort(np.abs(t - 0.5), kind="stable") if t[i] < 0.5]
    if params.n > 25:
        above, below = above[:12], below[:12]
    return above, below


def _profile_key(prof: StrategyProfile) -> bytes:
    return prof.g.tobytes() + np.round(prof.x, 10).tobytes() + np.round(prof.y, 10).tobytes()


def welfare_max_equilibrium(
    params: GameParams, mode: str = EXACT
) -> tuple[StrategyProfile, EquilibriumReport]:
    """Best verified equilibrium from a structured candidate set.

    Candidates: the empty profile, the independent construction, two-player
    core templates over moderate pairs, and best-response dynamics from eight
    seeded starts (one empty, seven anchored at interior type quantiles).
    Ties go to independent networks, then to fewer contributors.
    """
    candidates: list[StrategyProfile] = [
        StrategyProfile.isolated(params),
        construct_independent(params),
    ]

    above, below = _moderate_side_candidates(params)
    for a in above:
        for b in below:
            pc = construct_partially_collaborative(params, a, b, mode)
            if pc is not None:
                candidates.append(pc)
            co = construct_collaborative(params, a, b, mode)
            if co is not None:
                candidates.append(co)

    for s in range(_DYNAMICS_STARTS):
        if s == 0:
            start = StrategyProfile.isolated(params)
        else:
            start = _anchored_start(params, s / _DYNAMICS_STARTS)
        config = DynamicsConfig(max_rounds=60, order=RANDOM_PERMUTATION, seed=s, mode=mode)
        try:
            candidates.append(best_response_dynamics(start, params, config))
        except NonConvergenceError:
            continue

    best: tuple[float, StrategyProfile, EquilibriumReport] | None = None
    seen: set[bytes] = set()
    for prof in candidates:
        key = _profile_key(prof)
        if key in seen:
            continue
        seen.add(key)
        report = verify_nash(prof, params, mode)
        if report.classification == NON_EQUILIBRIUM:
            continue
        w = welfare(prof, params)[0]
        if best is None or w > best[0] + _WELFARE_TIE_TOL:
            best = (w, prof, report)
        elif abs(w - best[0]) <= _WELFARE_TIE_TOL:
            cur_rep = best[2]
            better_class = (
                report.classification == INDEPENDENT
                and cur_rep.classification != INDEPENDENT
            )
            same_class_fewer = (
                report.classification == cur_rep.classification
                and len(report.contributors) < len(cur_rep.contributors)
            )
            if better_class or same_class_fewer:
                best = (w, prof, report)
    if best is None:
        raise RuntimeError("no candidate survived verification")
    return best[1], best[2]
