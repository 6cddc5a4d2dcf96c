"""Core primitives of the two-good network game.

Players are indexed by strictly increasing taste types in [0, 1] with the
extreme types 0 and 1 always present.  A strategy is a pair of non-negative
contributions (one per good) plus a row of directed links; sponsoring a link
to j grants access to j's full provision of both goods.  A player with taste
weight zero on a good simply ignores that good: the 0 * f(0) = 0 convention
is applied throughout so that corner players specialize cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .benefits import BenefitSpec

# Absolute tolerance for "equals isolation demand" style checks.
EPS_NUM = 1e-9
# Minimum utility gain that counts as a profitable deviation.
EPS_DEV = 1e-7


# ----------------------------------------------------------------------
# type sampling
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TruncNormal:
    """Normal(mean, sd) truncated to [0, 1], sampled by inverse CDF."""

    mean: float = 0.5
    sd: float = 1.0

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError("sd must be positive")


UNIFORM = "uniform"

# Rational approximation of the standard normal quantile (Acklam's
# coefficients), refined with one Halley step so the result is accurate to
# near machine precision while staying fully deterministic and portable.
_QA = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
       1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_QB = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
       6.680131188771972e+01, -1.328068155288572e+01)
_QC = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
       -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_QD = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
       3.754408661907416e+00)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5])
             / ((((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0))
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = ((((((_QA[0] * r + _QA[1]) * r + _QA[2]) * r + _QA[3]) * r + _QA[4]) * r + _QA[5]) * q
             / (((((_QB[0] * r + _QB[1]) * r + _QB[2]) * r + _QB[3]) * r + _QB[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5])
              / ((((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0))
    # one Halley refinement against erfc
    e = normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def _draw_one(dist, rng) -> float:
    u = rng.random()
    if dist == UNIFORM:
        return u
    if isinstance(dist, TruncNormal):
        a = normal_cdf((0.0 - dist.mean) / dist.sd)
        b = normal_cdf((1.0 - dist.mean) / dist.sd)
        p = a + u * (b - a)
        if not 0.0 < p < 1.0:
            return 0.0 if p <= 0.0 else 1.0
        return dist.mean + dist.sd * normal_quantile(p)
    raise ValueError(f"unknown distribution {dist!r}")


def draw_interior_types(dist, count: int, rng) -> list[float]:
    """Draw `count` distinct interior types in (0, 1), in draw order.

    Collisions (with earlier draws or with the endpoints) are re-drawn, which
    keeps the realized vector consistent with a continuous distribution.
    """
    seen: set[float] = set()
    out: list[float] = []
    while len(out) < count:
        t = _draw_one(dist, rng)
        if t <= 0.0 or t >= 1.0 or t in seen:
            continue
        seen.add(t)
        out.append(t)
    return out


def sample_types(dist, n: int, seed: int) -> np.ndarray:
    """Sample a sorted type vector of length n with 0 and 1 always present."""
    if n < 3:
        raise ValueError("need at least 3 players")
    rng = np.random.Generator(np.random.PCG64(seed))
    interior = draw_interior_types(dist, n - 2, rng)
    return np.array(sorted([0.0] + interior + [1.0]))


def validate_types(types: np.ndarray) -> np.ndarray:
    types = np.asarray(types, dtype=float)
    if types.ndim != 1 or types.size < 3:
        raise ValueError("type vector must be 1-D with at least 3 entries")
    if types[0] != 0.0 or types[-1] != 1.0:
        raise ValueError("type vector must start at 0 and end at 1")
    if not np.all(np.diff(types) > 0):
        raise ValueError("types must be strictly increasing")
    return types


# ----------------------------------------------------------------------
# parameters and strategy profiles
# ----------------------------------------------------------------------

class IsolationDemand(NamedTuple):
    x_hat: float
    y_hat: float


def isolation_demand(t: float, c: float, spec: BenefitSpec) -> IsolationDemand:
    """Autarky contributions: weight * f'(z) = c per good, zero at zero weight."""
    if c <= 0:
        raise ValueError("contribution cost must be positive")
    x_hat = spec.deriv_inv(c / t) if t > 0.0 else 0.0
    y_hat = spec.deriv_inv(c / (1.0 - t)) if t < 1.0 else 0.0
    return IsolationDemand(float(x_hat), float(y_hat))


@dataclass(frozen=True)
class GameParams:
    """Immutable game description: types, costs, linking fee, benefit family.

    ``costs`` holds per-player contribution costs and defaults to the common
    cost ``c``; the subsidy planner lowers individual entries.
    """

    types: np.ndarray
    c: float
    k: float
    benefit: BenefitSpec
    costs: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "types", validate_types(self.types))
        if self.c <= 0 or self.k <= 0:
            raise ValueError("c and k must be positive")
        if self.costs is not None:
            costs = np.asarray(self.costs, dtype=float)
            if costs.shape != self.types.shape:
                raise ValueError("costs must match the type vector in shape")
            if np.any(costs <= 0):
                raise ValueError("all per-player costs must be positive")
            object.__setattr__(self, "costs", costs)

    @property
    def n(self) -> int:
        return self.types.size

    @cached_property
    def cost_vec(self) -> np.ndarray:
        if self.costs is not None:
            return self.costs
        return np.full(self.n, float(self.c))

    @cached_property
    def x_hat(self) -> np.ndarray:
        t = self.types
        out = np.zeros(self.n)
        pos = t > 0.0
        out[pos] = self.benefit.deriv_inv(self.cost_vec[pos] / t[pos])
        return out

    @cached_property
    def y_hat(self) -> np.ndarray:
        t = self.types
        out = np.zeros(self.n)
        pos = t < 1.0
        out[pos] = self.benefit.deriv_inv(self.cost_vec[pos] / (1.0 - t[pos]))
        return out

    def with_k(self, k: float) -> "GameParams":
        return GameParams(self.types, self.c, k, self.benefit, self.costs)

    def with_costs(self, costs: np.ndarray) -> "GameParams":
        return GameParams(self.types, self.c, self.k, self.benefit, costs)


@dataclass
class StrategyProfile:
    """Contributions per good plus the directed link matrix.

    ``g[i, j] = 1`` means player i sponsors a link to j and therefore consumes
    j's provision of both goods.  The diagonal is always zero.
    """

    x: np.ndarray
    y: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.g = np.asarray(self.g, dtype=np.int8)
        n = self.x.size
        if self.y.size != n or self.g.shape != (n, n):
            raise ValueError("inconsistent profile dimensions")
        if np.any(self.x < 0) or np.any(self.y < 0):
            raise ValueError("contributions must be non-negative")
        if np.any(np.diagonal(self.g) != 0):
            raise ValueError("link matrix must have a zero diagonal")

    @classmethod
    def isolated(cls, params: GameParams) -> "StrategyProfile":
        """Empty network with every player at their isolation demand."""
        n = params.n
        return cls(params.x_hat.copy(), params.y_hat.copy(), np.zeros((n, n), np.int8))

    @property
    def n(self) -> int:
        return self.x.size

    def copy(self) -> "StrategyProfile":
        return StrategyProfile(self.x.copy(), self.y.copy(), self.g.copy())

    def in_degree(self) -> np.ndarray:
        return np.asarray(self.g.sum(axis=0), dtype=int)

    def out_degree(self) -> np.ndarray:
        return np.asarray(self.g.sum(axis=1), dtype=int)

    def links_of(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.g[i])

    def consumption(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-player consumption of each good: own provision plus spillovers."""
        gx = self.g @ self.x
        gy = self.g @ self.y
        return self.x + gx, self.y + gy

    def set_strategy(self, i: int, targets, xi: float, yi: float) -> None:
        self.g[i, :] = 0
        for j in targets:
            self.g[i, j] = 1
        self.x[i] = xi
        self.y[i] = yi


def spillovers(profile: StrategyProfile, i: int) -> tuple[float, float]:
    """Provision player i accesses through sponsored links."""
    row = profile.g[i]
    return float(row @ profile.x), float(row @ profile.y)


def _weighted_benefit(weight: float, consumption: float, spec: BenefitSpec) -> float:
    # zero-weight goods contribute exactly 0 regardless of consumption
    if weight <= 0.0:
        return 0.0
    return weight * float(spec.value(consumption))


def utility(profile: StrategyProfile, i: int, params: GameParams) -> float:
    """Consumption benefits net of contribution and linking costs.

    Under the log family a positive-weight good with zero consumption yields
    -inf, marking the strategy as dominated rather than raising.
    """
    t = params.types[i]
    x_bar, y_bar = spillovers(profile, i)
    bx = _weighted_benefit(t, profile.x[i] + x_bar, params.benefit)
    by = _weighted_benefit(1.0 - t, profile.y[i] + y_bar, params.benefit)
    eta = int(profile.g[i].sum())
    return bx + by - params.cost_vec[i] * (profile.x[i] + profile.y[i]) - eta * params.k
