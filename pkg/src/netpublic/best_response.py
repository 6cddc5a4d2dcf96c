"""Optimal play for a single player: contributions, link gains, best responses.

Contributions given a fixed link set have a closed form (top up each good to
its isolation demand), so a best response reduces to a search over link sets.
Exact mode enumerates every subset of opponents; structural mode restricts
the search to plausible targets (current link receivers plus the largest
providers), which is what equilibrium structure says sponsors actually use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import EPS_DEV, GameParams, StrategyProfile, utility

EXACT = "exact"
STRUCTURAL = "structural"

_EXACT_MAX_PLAYERS = 16
_STRUCTURAL_TOP_PROVIDERS = 4
_STRUCTURAL_MAX_LINKS = 3


@dataclass
class Deviation:
    """Witness of a Nash violation: an improving strategy for one player."""

    player: int
    new_links: tuple[int, ...]
    new_x: float
    new_y: float
    utility_gain: float


@dataclass
class BestResponse:
    links: tuple[int, ...]
    x: float
    y: float
    utility: float


@lru_cache(maxsize=128)
def _subset_matrix(m: int, cap: int | None) -> np.ndarray:
    """All subsets of range(m) up to size cap, ordered by (size, lex).

    Returned as a float matrix so that spillover sums are plain matmuls; the
    ordering makes "first subset within tolerance of the maximum" implement
    the fewest-links-then-lexicographic tie-break directly.
    """
    top = m if cap is None else min(cap, m)
    rows = []
    for size in range(top + 1):
        for combo in itertools.combinations(range(m), size):
            row = np.zeros(m)
            row[list(combo)] = 1.0
            rows.append(row)
    mat = np.array(rows) if rows else np.zeros((1, 0))
    mat.setflags(write=False)
    return mat


def optimal_contributions(
    i: int, links, profile: StrategyProfile, params: GameParams
) -> tuple[float, float]:
    """Top-up rule: provide max(isolation demand - spillovers, 0) per good."""
    links = list(links)
    if i in links:
        raise ValueError("a player cannot link to themselves")
    x_bar = float(profile.x[links].sum())
    y_bar = float(profile.y[links].sum())
    xi = max(params.x_hat[i] - x_bar, 0.0)
    yi = max(params.y_hat[i] - y_bar, 0.0)
    return xi, yi


def _gross_utilities(
    i: int, cand: np.ndarray, subsets: np.ndarray, profile: StrategyProfile, params: GameParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Utility of every candidate link subset with re-optimized contributions."""
    x_bar = subsets @ profile.x[cand]
    y_bar = subsets @ profile.y[cand]
    xi = np.maximum(params.x_hat[i] - x_bar, 0.0)
    yi = np.maximum(params.y_hat[i] - y_bar, 0.0)
    t = params.types[i]
    spec = params.benefit
    bx = t * spec.value(xi + x_bar) if t > 0.0 else 0.0
    by = (1.0 - t) * spec.value(yi + y_bar) if t < 1.0 else 0.0
    util = bx + by - params.cost_vec[i] * (xi + yi) - params.k * subsets.sum(axis=1)
    return util, xi, yi


def _gross_opt(i: int, links, profile: StrategyProfile, params: GameParams) -> float:
    """Best achievable utility for a fixed link set, excluding link fees."""
    xi, yi = optimal_contributions(i, links, profile, params)
    links = list(links)
    x_bar = float(profile.x[links].sum())
    y_bar = float(profile.y[links].sum())
    t = params.types[i]
    spec = params.benefit
    bx = t * float(spec.value(xi + x_bar)) if t > 0.0 else 0.0
    by = (1.0 - t) * float(spec.value(yi + y_bar)) if t < 1.0 else 0.0
    return bx + by - params.cost_vec[i] * (xi + yi)


ADD = "add"
DELETE = "delete"


def gains_from_link(
    profile: StrategyProfile, i: int, j: int, action: str, params: GameParams
) -> float:
    """Gross value of the single link i -> j, excluding the linking fee.

    Both sides of the comparison re-optimize i's contributions, so adding and
    deleting the same link are exact mirrors: adding is profitable iff the
    gain covers the fee, keeping is profitable iff it does.
    """
    if i == j:
        raise IndexError("no self links")
    linked = bool(profile.g[i, j])
    if action == ADD and linked:
        raise ValueError("link already present")
    if action == DELETE and not linked:
        raise ValueError("link not present")
    targets = set(profile.links_of(i).tolist())
    with_j = sorted(targets | {j})
    without_j = sorted(targets - {j})
    return _gross_opt(i, with_j, profile, params) - _gross_opt(i, without_j, profile, params)


def _structural_candidates(i: int, profile: StrategyProfile, params: GameParams) -> np.ndarray:
    receivers = np.flatnonzero(profile.in_degree() >= 1)
    provision = profile.x + profile.y
    order = np.lexsort((np.arange(params.n), -provision))
    top = [j for j in order if j != i][:_STRUCTURAL_TOP_PROVIDERS]
    cand = set(receivers.tolist()) | set(top)
    cand.discard(i)
    return np.array(sorted(cand), dtype=int)


def best_response(
    i: int, profile: StrategyProfile, params: GameParams, mode: str = EXACT
) -> BestResponse:
    """Utility-maximizing (links, contributions) for player i.

    Among strategies within EPS_DEV of the maximum, the one with the fewest
    links and then the lexicographically smallest target set is returned, so
    results are identical across platforms and traversal orders.
    """
    n = params.n
    if mode == EXACT:
        if n > _EXACT_MAX_PLAYERS:
            raise ValueError(f"exact mode supports at most {_EXACT_MAX_PLAYERS} players")
        cand = np.array([j for j in range(n) if j != i], dtype=int)
        cap = None
    elif mode == STRUCTURAL:
        cand = _structural_candidates(i, profile, params)
        cap = _STRUCTURAL_MAX_LINKS
    else:
        raise ValueError(f"unknown mode {mode!r}")

    subsets = _subset_matrix(len(cand), cap)
    util, xi, yi = _gross_utilities(i, cand, subsets, profile, params)
    best = np.max(util)
    idx = int(np.argmax(util >= best - EPS_DEV))
    chosen = cand[subsets[idx].astype(bool)]
    return BestResponse(
        links=tuple(int(j) for j in chosen),
        x=float(xi[idx]),
        y=float(yi[idx]),
        utility=float(util[idx]),
    )


def find_profitable_deviation(
    profile: StrategyProfile, params: GameParams, mode: str = EXACT
) -> Deviation | None:
    """Lowest-indexed player with a strategy improving by more than EPS_DEV."""
    for i in range(params.n):
        current = utility(profile, i, params)
        br = best_response(i, profile, params, mode)
        if br.utility > current + EPS_DEV:
            return Deviation(
                player=i,
                new_links=br.links,
                new_x=br.x,
                new_y=br.y,
                utility_gain=br.utility - current,
            )
    return None
