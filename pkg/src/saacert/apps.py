"""End-to-end application builders: CVaR portfolios and l1-ball regression.

``build_portfolio`` reformulates the CVaR budget constraint over an
augmented decision (x, t) on simplex x box; ``build_lasso`` wraps squared
prediction error over an l1 ball, optionally rescaled by the data-driven
diagonal of root-mean-square features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import make_distribution
from .errors import ConfigError, DegenerateFeatureError, EmptySampleError
from .geometry import SpaceDescriptor
from .problem import (HolderInfo, ScenarioSet, StochasticProgram, TrueOracle,
                      read_table)


def cvar(losses, p: float) -> float:
    """Conditional value-at-risk: min_t { t + mean[(G - t)_+] / p }.

    The minimum is attained at the k-th order statistic with
    k = max(1, ceil((1 - p) N)); ties resolve to the lower index, which does
    not change the value.  p = 1 gives the mean.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise EmptySampleError("CVaR needs at least one loss")
    if not (0 < p <= 1):
        raise ConfigError("CVaR level must lie in (0, 1]", p=p)
    n = losses.size
    k = max(1, math.ceil((1 - p) * n - 1e-12))
    t_star = float(np.sort(losses)[k - 1])
    return t_star + float(np.mean(np.maximum(losses - t_star, 0.0))) / p


# ---------------------------------------------------------------------------
# portfolio


@dataclass
class ReturnsDataset:
    """N scenarios of per-asset return rates."""

    returns: np.ndarray
    source: str = "csv"
    names: list | None = None

    def __post_init__(self):
        self.returns = np.atleast_2d(np.asarray(self.returns, dtype=float))
        if self.returns.size == 0:
            raise EmptySampleError("returns dataset is empty")
        if not np.all(np.isfinite(self.returns)):
            raise ConfigError("returns dataset has missing or non-finite entries")

    @property
    def n(self) -> int:
        return self.returns.shape[0]

    @property
    def assets(self) -> int:
        return self.returns.shape[1]

    @classmethod
    def from_csv(cls, path) -> "ReturnsDataset":
        header, data = read_table(path)
        return cls(returns=data, source="csv",
                   names=[str(c) for c in header])

    @classmethod
    def synthetic(cls, assets: int, n: int, seed: int, dist="gaussian",
                  means=None, scale: float = 0.05) -> "ReturnsDataset":
        d = make_distribution(dist) if isinstance(dist, str) else dist
        means = (np.linspace(0.01, 0.03, assets) if means is None
                 else np.asarray(means, dtype=float))
        if means.shape != (assets,):
            raise ConfigError("means must have one entry per asset",
                              assets=assets, got=means.shape)
        rng = np.random.default_rng(seed)
        draws = d.sample(rng, n * assets).reshape(n, assets)
        return cls(returns=means + scale * (draws - d.mean),
                   source=f"synthetic(seed={seed}, dist={d.name})")


@dataclass
class PortfolioProblem:
    """CVaR-budget portfolio as a stochastic program over (x, t)."""

    program: StochasticProgram
    dataset: ReturnsDataset
    p: float
    beta: float
    t_bounds: tuple
    details: dict = field(default_factory=dict)

    @property
    def assets(self) -> int:
        return self.dataset.assets

    def split(self, point) -> tuple[np.ndarray, float]:
        point = np.asarray(point, dtype=float)
        return point[:-1], float(point[-1])


def build_portfolio(dataset: ReturnsDataset, p: float, beta: float,
                    sampler=None) -> PortfolioProblem:
    """Min expected loss s.t. t + mean[(-xi^T x - t)_+]/p <= beta.

    The scalar t is compactified to [min loss - 1, max loss + 1] from the
    dataset: the optimal t is an order statistic of realized losses, so it
    lies strictly inside.  The hinge subgradient uses 0 at the kink.
    """
    if not (0 < p <= 1):
        raise ConfigError("CVaR level must lie in (0, 1]", p=p)
    d = dataset.assets
    losses = -dataset.returns
    t_lo, t_hi = float(losses.min() - 1.0), float(losses.max() + 1.0)
    space = SpaceDescriptor.product(SpaceDescriptor.simplex(d),
                                    SpaceDescriptor.interval(t_lo, t_hi))

    def f0(point, xis):
        return -(xis @ point[:d])

    def f1(point, xis):
        t = point[d]
        return t + np.maximum(-(xis @ point[:d]) - t, 0.0) / p - beta

    def mean0(pts, xis):
        return -(pts[:, :d] @ np.mean(xis, axis=0))

    def mean1(pts, xis):
        out = np.empty(len(pts))
        for start in range(0, len(pts), 256):
            block = pts[start:start + 256]
            loss = -(xis @ block[:, :d].T)            # (N, G)
            t = block[:, d][None, :]
            out[start:start + 256] = (block[:, d]
                                      + np.mean(np.maximum(loss - t, 0.0), axis=0) / p
                                      - beta)
        return out

    oracle = None
    if sampler is not None:
        oracle = TrueOracle(sampler=lambda rng, n: np.atleast_2d(sampler(rng, n)))
    program = StochasticProgram(
        objective=f0, constraints=[f1], space=space,
        holder=[HolderInfo(1.0), HolderInfo(1.0)], oracle=oracle, convex=True,
        fast_means=[mean0, mean1], name="portfolio")
    return PortfolioProblem(program=program, dataset=dataset, p=p, beta=beta,
                            t_bounds=(t_lo, t_hi),
                            details={"assets": d, "scenarios": dataset.n})


def portfolio_gradients(problem: PortfolioProblem):
    """Per-scenario subgradients of the portfolio integrands over (x, t)."""
    d = problem.assets
    p = problem.p

    def g0(point, xis):
        g = np.zeros((len(xis), d + 1))
        g[:, :d] = -xis
        return g

    def g1(point, xis):
        t = point[d]
        active = (-(xis @ point[:d]) - t) > 0            # 0 at the kink
        g = np.zeros((len(xis), d + 1))
        g[:, :d] = -xis * (active[:, None] / p)
        g[:, d] = 1.0 - active / p
        return g

    return [g0, g1]


# ---------------------------------------------------------------------------
# l1-ball regression


@dataclass
class LassoProblem:
    """Squared-error regression over an l1 ball (optionally feature-scaled).

    With weighting, the decision variable is u = D x for the diagonal D of
    root-mean-square features; ``to_original`` undoes the change of
    variables.
    """

    program: StochasticProgram
    radius: float
    weighted: bool
    diag: np.ndarray | None
    details: dict = field(default_factory=dict)

    def to_original(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return u / self.diag if self.weighted else u


def build_lasso(features, response, radius: float,
                weighted: bool = False, sampler=None) -> LassoProblem:
    """Mean squared residual (y - <phi, x>)^2 over {||x||_1 <= radius}."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    response = np.asarray(response, dtype=float).ravel()
    if features.shape[0] != response.shape[0]:
        raise ConfigError("features and response disagree on scenario count",
                          features=features.shape[0], response=response.shape[0])
    if features.size == 0:
        raise EmptySampleError("regression dataset is empty")
    if radius <= 0:
        raise ConfigError("l1 radius must be positive", radius=radius)
    d = features.shape[1]
    diag = None
    if weighted:
        diag = np.sqrt(np.mean(features ** 2, axis=0))
        bad = np.flatnonzero(diag <= 0)
        if bad.size:
            raise DegenerateFeatureError(
                "features with zero second moment cannot be rescaled",
                indices=bad.tolist())
        features = features / diag
    data = np.hstack([features, response[:, None]])

    def f0(x, xis):
        return (xis[:, d] - xis[:, :d] @ x) ** 2

    def mean0(pts, xis):
        out = np.empty(len(pts))
        for start in range(0, len(pts), 256):
            block = pts[start:start + 256]
            resid = xis[:, d][:, None] - xis[:, :d] @ block.T
            out[start:start + 256] = np.mean(resid ** 2, axis=0)
        return out

    oracle = None
    if sampler is not None:
        oracle = TrueOracle(sampler=lambda rng, n: np.atleast_2d(sampler(rng, n)))
    space = SpaceDescriptor.ball(np.zeros(d), radius, norm="l1")
    program = StochasticProgram(
        objective=f0, constraints=[], space=space, holder=[HolderInfo(1.0)],
        oracle=oracle, convex=True, fast_means=[mean0], name="lasso")
    return LassoProblem(program=program, radius=radius, weighted=weighted,
                        diag=diag,
                        details={"features": d, "scenarios": len(response),
                                 "scenario_matrix": data.shape})


def lasso_scenarios(problem_or_features, response=None,
                    weighted: bool = False) -> ScenarioSet:
    """Scenario set (features then response column) for a built regression."""
    if response is None:
        raise ConfigError("lasso_scenarios needs features and response arrays")
    features = np.atleast_2d(np.asarray(problem_or_features, dtype=float))
    resp = np.asarray(response, dtype=float).ravel()
    if weighted:
        diag = np.sqrt(np.mean(features ** 2, axis=0))
        bad = np.flatnonzero(diag <= 0)
        if bad.size:
            raise DegenerateFeatureError(
                "features with zero second moment cannot be rescaled",
                indices=bad.tolist())
        features = features / diag
    return ScenarioSet(np.hstack([features, resp[:, None]]))
