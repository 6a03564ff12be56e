"""Decision-space geometry.

Descriptors for the compact sets the library optimizes over (boxes, norm
balls, the probability simplex, finite point clouds, and products of those),
plus the metric machinery built on them: deterministic grids, greedy packing
nets, metric entropy with analytic brackets, the dyadic chaining sum that
drives the uniform deviation bounds, and one-sided set deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import BudgetError, DimensionMismatchError

NORMS = ("l1", "l2", "linf")

DEFAULT_GRID_BUDGET = 2_000_000

# ---------------------------------------------------------------------------
# norms and distances


def vec_norm(v, norm: str = "l2") -> float:
    """Norm of a single vector under one of the supported tags."""
    v = np.asarray(v, dtype=float).ravel()
    if norm == "l1":
        return float(np.abs(v).sum())
    if norm == "l2":
        return float(np.sqrt((v * v).sum()))
    if norm == "linf":
        return float(np.abs(v).max()) if v.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")


def dists_to(points: np.ndarray, x, norm: str = "l2") -> np.ndarray:
    """Distances from every row of ``points`` to the single point ``x``."""
    diff = np.abs(np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(x, dtype=float))
    if norm == "l1":
        return diff.sum(axis=1)
    if norm == "l2":
        return np.sqrt((diff * diff).sum(axis=1))
    if norm == "linf":
        return diff.max(axis=1)
    raise ValueError(f"unknown norm {norm!r}")


def cross_dists(a: np.ndarray, b: np.ndarray, norm: str = "l2") -> np.ndarray:
    """Pairwise distance matrix between rows of ``a`` and rows of ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    diff = np.abs(a[:, None, :] - b[None, :, :])
    if norm == "l1":
        return diff.sum(axis=2)
    if norm == "l2":
        return np.sqrt((diff * diff).sum(axis=2))
    if norm == "linf":
        return diff.max(axis=2)
    raise ValueError(f"unknown norm {norm!r}")


def max_pairwise(points: np.ndarray, norm: str = "l2", chunk: int = 512) -> float:
    """Largest pairwise distance among the rows of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    if n < 2:
        return 0.0
    best = 0.0
    for start in range(0, n, chunk):
        block = cross_dists(pts[start : start + chunk], pts, norm)
        best = max(best, float(block.max()))
    return best


def min_pairwise_gap(points: np.ndarray, norm: str = "l2", chunk: int = 512) -> float:
    """Smallest strictly positive pairwise distance (inf for < 2 points)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    if n < 2:
        return math.inf
    best = math.inf
    for start in range(0, n, chunk):
        block = cross_dists(pts[start : start + chunk], pts, norm)
        rows = np.arange(start, min(start + chunk, n))
        block[np.arange(len(rows)), rows] = math.inf  # mask self-distances
        best = min(best, float(block.min()))
    return best


# ---------------------------------------------------------------------------
# Euclidean projections onto the supported sets


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {u >= 0, sum(u) = total}."""
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = int(ind[cond][-1])
    tau = css[cond][-1] / rho
    return np.maximum(v - tau, 0.0)


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of the given radius."""
    v = np.asarray(v, dtype=float).ravel()
    if np.abs(v).sum() <= radius:
        return v.copy()
    w = project_simplex(np.abs(v), total=radius)
    return np.sign(v) * w


# ---------------------------------------------------------------------------
# descriptors


@dataclass
class SpaceDescriptor:
    """A compact decision set together with the metric used on it.

    ``kind`` is one of ``box``, ``ball``, ``simplex``, ``cloud`` or
    ``product``.  Balls are balls of the descriptor's own norm, so their
    diameter is exactly ``2 * radius``.  Products concatenate their parts and
    are always measured in the l1 norm of the concatenation, which keeps
    grids, diameters and projections cheap and blockwise.
    """

    kind: str
    dim: int
    norm: str = "l2"
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    points: np.ndarray | None = None
    parts: tuple["SpaceDescriptor", ...] = ()
    grid_budget: int = DEFAULT_GRID_BUDGET
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def box(cls, lo, hi, norm: str = "linf", grid_budget: int = DEFAULT_GRID_BUDGET):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionMismatchError("box bounds must have equal shape",
                                         lo=list(lo.shape), hi=list(hi.shape))
        if np.any(hi < lo):
            raise ValueError("box upper bounds must dominate lower bounds")
        return cls(kind="box", dim=lo.size, norm=norm, lo=lo, hi=hi, grid_budget=grid_budget)

    @classmethod
    def interval(cls, lo: float, hi: float, **kw):
        return cls.box([lo], [hi], **kw)

    @classmethod
    def ball(cls, center, radius: float, norm: str = "l2",
             grid_budget: int = DEFAULT_GRID_BUDGET):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if radius < 0:
            raise ValueError("ball radius must be nonnegative")
        return cls(kind="ball", dim=center.size, norm=norm, center=center,
                   radius=float(radius), grid_budget=grid_budget)

    @classmethod
    def simplex(cls, dim: int, norm: str = "l1", grid_budget: int = DEFAULT_GRID_BUDGET):
        if dim < 1:
            raise ValueError("simplex needs dim >= 1")
        return cls(kind="simplex", dim=dim, norm=norm, grid_budget=grid_budget)

    @classmethod
    def cloud(cls, points, norm: str = "l2"):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(kind="cloud", dim=points.shape[1], norm=norm, points=points)

    @classmethod
    def product(cls, *parts: "SpaceDescriptor", grid_budget: int = DEFAULT_GRID_BUDGET):
        if not parts:
            raise ValueError("product needs at least one part")
        return cls(kind="product", dim=sum(p.dim for p in parts), norm="l1",
                   parts=tuple(parts), grid_budget=grid_budget)

    # -- metric facts -------------------------------------------------------

    def diameter(self, norm: str | None = None) -> float:
        """Exact diameter of the set under ``norm`` (default: own norm)."""
        n = norm or self.norm
        if self.kind == "box":
            return vec_norm(self.hi - self.lo, n)
        if self.kind == "ball":
            return 2.0 * self.radius * _ball_norm_factor(self.norm, n, self.dim)
        if self.kind == "simplex":
            if self.dim == 1:
                return 0.0
            return {"l1": 2.0, "l2": math.sqrt(2.0), "linf": 1.0}[n]
        if self.kind == "cloud":
            key = ("diam", n)
            if key not in self._cache:
                self._cache[key] = max_pairwise(self.points, n)
            return self._cache[key]
        if self.kind == "product":
            if n != "l1":
                raise ValueError("product spaces are measured in l1 only")
            return sum(p.diameter("l1") for p in self.parts)
        raise ValueError(f"unknown kind {self.kind!r}")

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise DimensionMismatchError("point has wrong dimension",
                                         expected=self.dim, got=int(x.size))
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        if self.kind == "ball":
            return vec_norm(x - self.center, self.norm) <= self.radius + tol
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)
        if self.kind == "cloud":
            return bool(dists_to(self.points, x, self.norm).min() <= tol)
        if self.kind == "product":
            off = 0
            for p in self.parts:
                if not p.contains(x[off : off + p.dim], tol):
                    return False
                off += p.dim
            return True
        raise ValueError(f"unknown kind {self.kind!r}")

    def project(self, x) -> np.ndarray:
        """Euclidean projection onto the set (nearest cloud point for clouds)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise DimensionMismatchError("point has wrong dimension",
                                         expected=self.dim, got=int(x.size))
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        if self.kind == "ball":
            d = x - self.center
            if self.norm == "l2":
                r = vec_norm(d, "l2")
                return x.copy() if r <= self.radius else self.center + d * (self.radius / r)
            if self.norm == "l1":
                return self.center + project_l1_ball(d, self.radius)
            return self.center + np.clip(d, -self.radius, self.radius)
        if self.kind == "simplex":
            return project_simplex(x)
        if self.kind == "cloud":
            return self.points[int(np.argmin(dists_to(self.points, x, "l2")))].copy()
        if self.kind == "product":
            out, off = [], 0
            for p in self.parts:
                out.append(p.project(x[off : off + p.dim]))
                off += p.dim
            return np.concatenate(out)
        raise ValueError(f"unknown kind {self.kind!r}")

    # -- grids ---------------------------------------------------------------

    def grid_count(self, h: float) -> int:
        """Number of candidate points ``grid(h)`` would enumerate (pre-filter)."""
        if h <= 0:
            raise ValueError("grid resolution must be positive")
        if self.kind == "box":
            count = 1
            for side in self.hi - self.lo:
                count *= int(math.ceil(side / h)) + 1 if side > 0 else 1
            return count
        if self.kind == "ball":
            lo = self.center - self.radius
            hi = self.center + self.radius
            return SpaceDescriptor.box(lo, hi).grid_count(h)
        if self.kind == "simplex":
            m = max(1, int(math.ceil(1.0 / h)))
            return math.comb(m + self.dim - 1, self.dim - 1)
        if self.kind == "cloud":
            return len(self.points)
        if self.kind == "product":
            count = 1
            for p in self.parts:
                count *= p.grid_count(h)
            return count
        raise ValueError(f"unknown kind {self.kind!r}")

    def grid(self, h: float) -> np.ndarray:
        """Deterministic covering grid with spacing at most ``h`` per axis.

        Raises :class:`BudgetError` when the enumeration would exceed the
        descriptor's ``grid_budget``.
        """
        pts, _ = self.grid_with_gap(h)
        return pts

    def grid_with_gap(self, h: float) -> tuple[np.ndarray, float]:
        """Grid points plus the exact minimum positive gap of the lattice."""
        required = self.grid_count(h)
        if required > self.grid_budget:
            raise BudgetError("grid enumeration exceeds budget",
                              required=required, budget=self.grid_budget, resolution=h)
        if self.kind == "box":
            axes, steps = [], []
            for a, b in zip(self.lo, self.hi):
                side = b - a
                n = int(math.ceil(side / h)) + 1 if side > 0 else 1
                axes.append(np.linspace(a, b, n))
                if n > 1:
                    steps.append(side / (n - 1))
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
            return pts, (min(steps) if steps else math.inf)
        if self.kind == "ball":
            outer = SpaceDescriptor.box(self.center - self.radius,
                                        self.center + self.radius,
                                        grid_budget=self.grid_budget)
            pts, gap = outer.grid_with_gap(h)
            keep = dists_to(pts, self.center, self.norm) <= self.radius + 1e-12
            pts = pts[keep]
            if not len(pts):
                pts = self.center[None, :]
            return pts, gap
        if self.kind == "simplex":
            m = max(1, int(math.ceil(1.0 / h)))
            pts = _simplex_lattice(self.dim, m)
            gap = {"l1": 2.0 / m, "l2": math.sqrt(2.0) / m, "linf": 1.0 / m}[self.norm]
            if self.dim == 1:
                gap = math.inf
            return pts, gap
        if self.kind == "cloud":
            key = ("gap", self.norm)
            if key not in self._cache:
                self._cache[key] = min_pairwise_gap(self.points, self.norm)
            return self.points, self._cache[key]
        if self.kind == "product":
            blocks, gaps = zip(*(p.grid_with_gap(h) for p in self.parts))
            pts = blocks[0]
            for blk in blocks[1:]:
                pts = np.concatenate(
                    [np.repeat(pts, len(blk), axis=0),
                     np.tile(blk, (len(pts), 1))], axis=1)
            return pts, min(gaps)
        raise ValueError(f"unknown kind {self.kind!r}")


def _ball_norm_factor(shape_norm: str, measure_norm: str, dim: int) -> float:
    """sup of the measure norm over the unit ball of the shape norm."""
    if shape_norm == measure_norm:
        return 1.0
    table = {
        ("l1", "l2"): 1.0,
        ("l1", "linf"): 1.0,
        ("l2", "l1"): math.sqrt(dim),
        ("l2", "linf"): 1.0,
        ("linf", "l1"): float(dim),
        ("linf", "l2"): math.sqrt(dim),
    }
    return table[(shape_norm, measure_norm)]


def _simplex_lattice(dim: int, m: int) -> np.ndarray:
    """All points of the probability simplex with coordinates in Z/m."""
    if dim == 1:
        return np.array([[1.0]])
    rows = np.empty((math.comb(m + dim - 1, dim - 1), dim))
    slots = m + dim - 1
    for r, bars in enumerate(combinations(range(slots), dim - 1)):
        prev = -1
        for j, b in enumerate((*bars, slots)):
            rows[r, j] = b - prev - 1
            prev = b
    return rows / m


# ---------------------------------------------------------------------------
# packing nets and metric entropy


@dataclass
class PackingNet:
    """A maximal theta-separated subset of the candidate grid."""

    points: np.ndarray
    theta: float
    norm: str
    candidate_count: int

    @property
    def size(self) -> int:
        return len(self.points)


def _lex_order(points: np.ndarray) -> np.ndarray:
    keys = tuple(points[:, j] for j in range(points.shape[1] - 1, -1, -1))
    return points[np.lexsort(keys)]


def greedy_pack(candidates: np.ndarray, theta: float, norm: str) -> np.ndarray:
    """First-fit packing over candidates in lexicographic order.

    The result is maximal: every remaining candidate sits within ``theta`` of
    a selected point, so the size is a valid lower bound for the packing
    number that is exact on the candidate set whenever first-fit is optimal.
    """
    cands = _lex_order(np.atleast_2d(np.asarray(candidates, dtype=float)))
    alive = np.ones(len(cands), dtype=bool)
    chosen = []
    while alive.any():
        idx = int(np.argmax(alive))
        chosen.append(idx)
        alive &= dists_to(cands, cands[idx], norm) > theta
    return cands[np.array(chosen, dtype=int)]


def packing_net(space: SpaceDescriptor, theta: float, h: float | None = None) -> PackingNet:
    """Greedy maximal packing of the space at separation ``theta``.

    Candidates come from the descriptor's deterministic grid (the points
    themselves for clouds).  ``h`` defaults to ``theta / 4`` so the grid
    resolves the separation scale.
    """
    if theta <= 0:
        raise ValueError("separation theta must be positive")
    if space.kind == "cloud":
        cands = space.points
    else:
        cands = space.grid(h if h is not None else theta / 4.0)
    pts = greedy_pack(cands, theta, space.norm)
    return PackingNet(points=pts, theta=theta, norm=space.norm, candidate_count=len(cands))


@dataclass
class EntropyNumber:
    """ln of a greedy packing size plus an analytic bracket when available."""

    value: float
    net_size: int
    theta: float
    bracket: tuple[float, float] | None = None

    def within_bracket(self) -> bool | None:
        if self.bracket is None:
            return None
        lo, hi = self.bracket
        return lo - 1e-12 <= self.value <= hi + 1e-12


def entropy_number(space: SpaceDescriptor, theta: float, h: float | None = None) -> EntropyNumber:
    """Metric entropy ln N(theta) computed from a greedy packing net.

    For balls and boxes the result also carries the analytic bracket
    ``[d ln(R/theta) (when theta < R), d ln(1 + 2 R/theta)]`` with ``R`` the
    half-diameter; the lower end is meaningful for balls and cube-like boxes.
    """
    net = packing_net(space, theta, h)
    bracket = None
    if space.kind in ("box", "ball"):
        big_r = space.diameter() / 2.0
        lo = space.dim * math.log(big_r / theta) if theta < big_r else 0.0
        hi = space.dim * math.log1p(2.0 * big_r / theta)
        bracket = (max(lo, 0.0), hi)
    return EntropyNumber(value=math.log(net.size), net_size=net.size,
                         theta=theta, bracket=bracket)


# ---------------------------------------------------------------------------
# entropy models used by the chaining sum


def _strict_count(side: float, theta: float) -> int:
    """Max points in [0, side] with pairwise gaps strictly above theta."""
    if side <= 0:
        return 1
    q = side / theta
    r = round(q)
    if r >= 1 and abs(q - r) <= 1e-9 * max(1.0, abs(q)):
        return int(r)
    return int(math.floor(q)) + 1


class _LatticeEntropy:
    """Exact entropy of an axis-aligned box under the sup norm."""

    model = "lattice"
    cap = math.inf

    def __init__(self, sides):
        self.sides = [float(s) for s in sides]

    def __call__(self, theta: float) -> float:
        count = 1
        for s in self.sides:
            count *= _strict_count(s, theta)
        return math.log(count)


class _CloudEntropy:
    """Greedy packing entropy of a finite candidate set.

    Below the smallest positive pairwise gap every point is admissible, so
    the entropy saturates at ln(n) and no packing run is needed.
    """

    def __init__(self, points: np.ndarray, norm: str, min_gap: float, model: str = "cloud"):
        self.points = np.atleast_2d(points)
        self.norm = norm
        self.min_gap = min_gap
        self.model = model
        self.cap = math.log(len(self.points))

    def __call__(self, theta: float) -> float:
        if theta < self.min_gap:
            return self.cap
        return math.log(len(greedy_pack(self.points, theta, self.norm)))


def _entropy_model(space: SpaceDescriptor, h: float | None):
    if space.kind == "cloud":
        pts, gap = space.grid_with_gap(1.0)
        return _CloudEntropy(pts, space.norm, gap, model="cloud")
    if space.kind == "box" and space.norm == "linf":
        return _LatticeEntropy(space.hi - space.lo)
    d = space.diameter()
    resolution = h if h is not None else max(d, 1e-12) / 64.0
    pts, gap = space.grid_with_gap(resolution)
    return _CloudEntropy(pts, space.norm, gap, model="grid")


@dataclass
class AlphaComplexity:
    """Value and diagnostics of the dyadic chaining sum.

    ``value`` is ``sum_i (D^alpha / 2^(i alpha)) * sqrt(H(D/2^i) +
    H(D/2^(i-1)) + ln(i (i+1)))`` truncated per the reported rule.  When the
    entropy came from a grid surrogate of a continuous set, ``approximate``
    is True.
    """

    value: float
    alpha: float
    diameter: float
    terms: np.ndarray
    levels: int
    truncation: str
    tail_bound: float
    entropy_model: str
    approximate: bool


def a_alpha(space: SpaceDescriptor, alpha: float, h: float | None = None,
            max_levels: int = 60, rel_tol: float = 1e-9) -> AlphaComplexity:
    """Dyadic chaining sum of the space at Holder exponent ``alpha``.

    Stops when the current term drops below ``rel_tol`` times the partial sum
    or at ``max_levels``, whichever comes first, and reports a numeric bound
    on the truncated tail.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    diam = space.diameter()
    if diam <= 0:
        return AlphaComplexity(0.0, alpha, 0.0, np.zeros(0), 0, "degenerate", 0.0,
                               "none", False)
    model = _entropy_model(space, h)
    terms = []
    total = 0.0
    prev_h = 0.0  # entropy at scale D / 2^0 is ln(1)
    i = 0
    truncation = "level-cap"
    while i < max_levels:
        i += 1
        cur_h = model(diam / 2.0**i)
        term = (diam**alpha / 2.0 ** (i * alpha)) * math.sqrt(
            cur_h + prev_h + math.log(i * (i + 1)))
        terms.append(term)
        total += term
        prev_h = cur_h
        if term < rel_tol * total:
            truncation = "relative-tolerance"
            break
    tail = _tail_estimate(model, diam, alpha, i, prev_h, total, rel_tol)
    return AlphaComplexity(value=total, alpha=alpha, diameter=diam,
                           terms=np.asarray(terms), levels=i, truncation=truncation,
                           tail_bound=tail, entropy_model=model.model,
                           approximate=model.model == "grid")


def _tail_estimate(model, diam: float, alpha: float, last_i: int,
                   prev_h: float, total: float, rel_tol: float) -> float:
    """Numeric bound on the terms beyond the truncation point."""
    tail = 0.0
    i = last_i
    term = math.inf
    # extend the series with the same entropy model (cheap past saturation)
    while i < last_i + 400 and term > 1e-16 * max(total, 1.0):
        i += 1
        cur_h = min(model(diam / 2.0**i), model.cap) if model.cap < math.inf else model(diam / 2.0**i)
        term = (diam**alpha / 2.0 ** (i * alpha)) * math.sqrt(
            cur_h + prev_h + math.log(i * (i + 1)))
        tail += term
        prev_h = cur_h
    # geometric bound on what is left after the extension
    q = 2.0**-alpha * 1.2
    if q < 1.0 and term < math.inf:
        tail += term * q / (1.0 - q)
    return tail


# ---------------------------------------------------------------------------
# set deviations


def set_deviation(a: np.ndarray, b: np.ndarray, norm: str = "l2",
                  chunk: int = 512) -> float:
    """One-sided deviation sup_{x in a} dist(x, b)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if not len(a):
        return 0.0
    if not len(b):
        raise ValueError("reference set must be nonempty")
    worst = 0.0
    for start in range(0, len(a), chunk):
        block = cross_dists(a[start : start + chunk], b, norm)
        worst = max(worst, float(block.min(axis=1).max()))
    return worst


def dist_to_set(x, points: np.ndarray, norm: str = "l2") -> float:
    """Distance from a single point to a finite set."""
    return float(dists_to(points, x, norm).min())
