"""Finite-sample certificates for sample-average approximations.

Two complementary toolkits live here:

* the *a priori* side -- sample-size rules of the form
  ``N >= C * sigma^2 * (ln m + ln(1/p)) / eps^2`` with the variance proxy
  ``sigma`` assembled from a :class:`~saacert.moments.VarianceProfile`
  according to which guarantees are requested, packaged as a
  :class:`Certificate`;
* the *a posteriori* side -- deterministic deviation ledgers over grids and
  the checker that turns ledger inequalities into set-inclusion and
  optimality conclusions (``check_certificates``), together with grid
  estimates of the metric-regularity constant and the relaxation gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptySampleError, SlaterMarginError
from .geometry import cross_dists, dists_to
from .moments import VarianceProfile
from .problem import EmpiricalProblem, RelaxedSetQuery, StochasticProgram, relaxed_set_grid

_THEOREMS = ("fixed", "exterior", "interior")


# ---------------------------------------------------------------------------
# sample sizes and certificates


def sample_size(theorem: str, sigma_hat: float, eps: float, p: float,
                m: int = 0, constant: float = 1.0,
                slater_margin: float | None = None) -> int:
    """Smallest integer N satisfying the finite-sample threshold.

    ``fixed`` uses N >= C sigma^2 ln(1/p) / eps^2; ``exterior`` and
    ``interior`` add the union term: N >= C sigma^2 (ln m + ln(1/p)) / eps^2.
    The interior rule additionally requires eps <= slater_margin / 2.
    """
    if theorem not in _THEOREMS:
        raise ConfigError(f"unknown theorem {theorem!r}", allowed=list(_THEOREMS))
    if not (0 < p < 1):
        raise ConfigError("failure probability p must lie in (0, 1)", p=p)
    if eps <= 0:
        raise ConfigError("accuracy eps must be positive", eps=eps)
    if sigma_hat < 0 or constant <= 0:
        raise ConfigError("sigma_hat must be >= 0 and constant > 0",
                          sigma_hat=sigma_hat, constant=constant)
    if theorem == "fixed":
        log_term = math.log(1.0 / p)
    else:
        if m < 1:
            raise ConfigError(f"{theorem} certificates need at least one "
                              "stochastic constraint", m=m)
        log_term = math.log(m) + math.log(1.0 / p)
    if theorem == "interior" and slater_margin is not None:
        if slater_margin <= 0:
            raise SlaterMarginError("Slater margin must be positive",
                                    slater_margin=slater_margin)
        if eps > slater_margin / 2 + 1e-12:
            raise SlaterMarginError(
                "interior certificates need eps <= slater_margin / 2",
                eps=eps, slater_margin=slater_margin)
    n = constant * sigma_hat ** 2 * log_term / eps ** 2
    return max(1, math.ceil(n - 1e-12))


# which profile entries feed sigma for each (theorem, scope)
_BASE_COMPONENTS = {
    ("fixed", "near_optimality"): ["sigma0_hat_X"],
    ("fixed", "value_lower"): ["sigma0_hat_X", "sigma0_breve_z"],
    ("fixed", "value_upper"): ["sigma0_breve_x_star"],
    ("exterior", "feasibility"): ["sigmaI_hat_Y", "sigmaI_breve_z"],
    ("exterior", "optimality"): ["sigmaI_hat_Y", "sigmaI_breve_z",
                                 "sigmaI_breve_x_star", "sigma0_hat_ext"],
    ("exterior", "value"): ["sigmaI_hat_Y", "sigmaI_breve_z",
                            "sigmaI_breve_x_star", "sigma0_hat_ext",
                            "sigma0_breve_x_star"],
    ("interior", "feasibility"): ["sigmaI_hat_active0", "sigmaI_breve_y",
                                  "sigmaI_breve_z"],
    ("interior", "optimality"): ["sigmaI_hat_active0", "sigmaI_breve_y",
                                 "sigmaI_breve_z", "sigmaI_breve_y_star",
                                 "sigma0_hat_X"],
    ("interior", "value"): ["sigmaI_hat_active0", "sigmaI_breve_y",
                            "sigmaI_breve_z", "sigmaI_breve_y_star",
                            "sigma0_hat_X", "sigma0_breve_y_star"],
}
_SCOPES = {
    "fixed": ("near_optimality", "value_lower", "value_upper", "all"),
    "exterior": ("feasibility", "optimality", "value", "all"),
    "interior": ("feasibility", "optimality", "value", "all"),
}
# for convex programs, the exterior whole-set bound can be swapped for the
# active-set bound plus a pointwise term at an interior point
_LOCALIZED_SWAP = {"sigmaI_hat_Y": ["sigmaI_hat_active", "sigmaI_breve_y"]}


def components_for(theorem: str, scope: str, localized: bool = False) -> list[str]:
    """Profile entry names whose max gives sigma for this guarantee scope."""
    if theorem not in _SCOPES or scope not in _SCOPES[theorem]:
        raise ConfigError(f"unknown scope {scope!r} for theorem {theorem!r}",
                          allowed=list(_SCOPES.get(theorem, ())))
    if scope == "all":
        last = _SCOPES[theorem][-2]
        names = list(_BASE_COMPONENTS[(theorem, last)])
        if theorem == "fixed":
            names = ["sigma0_hat_X", "sigma0_breve_z", "sigma0_breve_x_star"]
    else:
        names = list(_BASE_COMPONENTS[(theorem, scope)])
    if localized:
        if theorem != "exterior":
            raise ConfigError("localized sigma assembly applies to exterior "
                              "certificates only", theorem=theorem)
        swapped = []
        for name in names:
            swapped.extend(_LOCALIZED_SWAP.get(name, [name]))
        names = swapped
    return names


def assemble_sigma(profile: VarianceProfile, scope: str,
                   localized: bool = False) -> tuple[float, dict]:
    """Max of the profile entries relevant to the requested scope."""
    names = components_for(profile.theorem, scope, localized)
    missing = [name for name in names if name not in profile.entries]
    if missing:
        raise ConfigError("variance profile is missing required entries",
                          missing=missing, required=names,
                          have=sorted(profile.entries))
    used = {name: profile.get(name) for name in names}
    return max(used.values()), used


_EVENTS = {
    ("fixed", "near_optimality"): [
        ("near-optimal-subset",
         "every eps-near empirical minimizer is 2*eps-near optimal")],
    ("fixed", "value_lower"): [
        ("value-lower", "true optimum - 2*eps <= empirical optimum")],
    ("fixed", "value_upper"): [
        ("value-upper", "empirical optimum <= true optimum + eps")],
    ("exterior", "feasibility"): [
        ("feasible-relaxed",
         "empirically feasible points satisfy constraints at level 2*eps"),
        ("feasible-exterior",
         "empirically feasible points lie within 2*c*eps of the feasible set")],
    ("exterior", "optimality"): [
        ("distance", "one-sided deviation of the empirical set is <= 2*c*eps"),
        ("near-optimal-value",
         "eps-near empirical minimizers cost at most true optimum + 2*eps")],
    ("exterior", "value"): [
        ("value-upper", "empirical optimum <= true optimum + eps"),
        ("value-lower",
         "true optimum <= empirical optimum + eps + relaxation gain at 2*eps")],
    ("interior", "feasibility"): [
        ("feasible-hard", "empirically feasible points satisfy every "
         "constraint exactly (no relaxation)")],
    ("interior", "optimality"): [
        ("near-optimal-subset",
         "eps-near empirical minimizers are (2*eps + interior gap)-near optimal")],
    ("interior", "value"): [
        ("value-upper",
         "empirical optimum <= true optimum + eps + interior gap at 2*eps"),
        ("value-lower", "true optimum <= empirical optimum + 2*eps")],
}
_RELAXATION = {"fixed": "none", "exterior": "+eps", "interior": "-eps"}


@dataclass
class Certificate:
    """An a priori finite-sample guarantee at confidence 1 - p."""

    theorem: str
    scope: str
    eps: float
    p: float
    constant: float
    m: int
    sigma_hat: float
    sigma_components: dict
    n_required: int
    relaxation: str
    events: list
    assumptions: list
    localized: bool = False
    n_available: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool | None:
        if self.n_available is None:
            return None
        return self.n_available >= self.n_required

    def to_json(self) -> dict:
        out = {
            "theorem": self.theorem,
            "scope": self.scope,
            "eps": self.eps,
            "p": self.p,
            "constant": self.constant,
            "m": self.m,
            "sigma_hat": self.sigma_hat,
            "sigma_components": dict(self.sigma_components),
            "n_required": self.n_required,
            "relaxation": self.relaxation,
            "events": [{"tag": t, "statement": s} for t, s in self.events],
            "assumptions": list(self.assumptions),
            "localized": self.localized,
            "details": dict(self.details),
        }
        if self.n_available is not None:
            out["n_available"] = self.n_available
            out["satisfied"] = self.satisfied
        return out


def certificate_from_sigma(theorem: str, sigma_hat: float, eps: float,
                           p: float, m: int = 0, constant: float = 1.0,
                           scope: str = "all",
                           slater_margin: float | None = None,
                           n_available: int | None = None) -> Certificate:
    """Certificate from a user-supplied variance aggregate."""
    n_req = sample_size(theorem, sigma_hat, eps, p, m=m, constant=constant,
                        slater_margin=slater_margin)
    scopes = [s for s in _SCOPES[theorem][:-1]] if scope == "all" else [scope]
    if any((theorem, s) not in _EVENTS for s in scopes):
        raise ConfigError(f"unknown scope {scope!r} for theorem {theorem!r}",
                          allowed=list(_SCOPES[theorem]))
    events = []
    for s in scopes:
        events.extend(_EVENTS[(theorem, s)])
    assumptions = ["compact hard set",
                   "Holder-continuous integrands in root-mean-square",
                   "variance aggregate supplied by caller"]
    if theorem == "exterior":
        assumptions.append("metric regularity of the feasible set")
    if theorem == "interior":
        assumptions.append("Slater point with margin at least 2*eps")
    return Certificate(theorem=theorem, scope=scope, eps=eps, p=p,
                       constant=constant, m=m, sigma_hat=sigma_hat,
                       sigma_components={"sigma": sigma_hat},
                       n_required=n_req, relaxation=_RELAXATION[theorem],
                       events=events, assumptions=assumptions,
                       n_available=n_available)


def certificate_from_profile(profile: VarianceProfile, eps: float, p: float,
                             m: int, constant: float = 1.0, scope: str = "all",
                             localized: bool = False,
                             slater_margin: float | None = None,
                             n_available: int | None = None) -> Certificate:
    """Assemble sigma for the scope and turn it into a sample-size pledge."""
    theorem = profile.theorem
    sigma, used = assemble_sigma(profile, scope, localized)
    n_req = sample_size(theorem, sigma, eps, p, m=m, constant=constant,
                        slater_margin=slater_margin)
    scopes = [s for s in _SCOPES[theorem][:-1]] if scope == "all" else [scope]
    events = []
    for s in scopes:
        events.extend(_EVENTS[(theorem, s)])
    assumptions = ["compact hard set",
                   "Holder-continuous integrands in root-mean-square"]
    if theorem == "exterior":
        assumptions.append("metric regularity of the feasible set")
    if theorem == "interior":
        assumptions.append("Slater point with margin at least 2*eps")
    if localized:
        assumptions.append("convex integrands (attested)")
    details = {"anchors": {k: np.asarray(v).tolist()
                           for k, v in profile.anchors.items()}}
    details.update({k: v for k, v in profile.details.items()
                    if isinstance(v, (int, float, str))})
    return Certificate(theorem=theorem, scope=scope, eps=eps, p=p,
                       constant=constant, m=m, sigma_hat=sigma,
                       sigma_components=used, n_required=n_req,
                       relaxation=_RELAXATION[theorem], events=events,
                       assumptions=assumptions, localized=localized,
                       n_available=n_available, details=details)


# ---------------------------------------------------------------------------
# regularity and gap estimation


def robinson_constant(diameter: float, slater_margin: float) -> float:
    """Metric-regularity constant from a Slater margin: c = D / margin."""
    if slater_margin <= 0:
        raise SlaterMarginError("Slater margin must be positive",
                                slater_margin=slater_margin)
    if diameter <= 0:
        raise ConfigError("diameter must be positive", diameter=diameter)
    return diameter / slater_margin


@dataclass
class RegularityEstimate:
    c_hat: float
    points_used: int
    points_skipped: int
    min_violation: float
    vacuous: bool
    provenance: str


def estimate_regularity(program: StochasticProgram, h: float,
                        min_violation: float | None = None,
                        use_exact_distance: bool = True) -> RegularityEstimate:
    """Largest observed ratio dist(x, X) / max_i [f_i(x)]_+ over a grid.

    Points with violations below ``min_violation`` (default 2h) are skipped:
    their grid distance is dominated by discretization error, which would
    otherwise blow the ratio up arbitrarily near the boundary.
    """
    if program.n_constraints == 0:
        return RegularityEstimate(0.0, 0, 0, 0.0, True, "no-constraints")
    grid = program.space.grid(h)
    min_violation = 2 * h if min_violation is None else min_violation
    worst = np.full(len(grid), -np.inf)
    for i in range(1, program.n_constraints + 1):
        worst = np.maximum(worst, program.true_fn_grid(i, grid))
    feas_pts = grid[worst <= 1e-12]
    if len(feas_pts) == 0:
        raise EmptySampleError("population feasible set has no grid points",
                               h=h)
    oracle = program.oracle
    exact = (use_exact_distance and oracle is not None
             and oracle.dist_to_feasible is not None)
    c_hat, used, skipped = 0.0, 0, 0
    for x, v in zip(grid, worst):
        if v <= 0:
            continue
        if v < min_violation:
            skipped += 1
            continue
        if exact:
            d = float(oracle.dist_to_feasible(x))
        else:
            d = float(dists_to(feas_pts, x, program.space.norm).min())
        c_hat = max(c_hat, d / v)
        used += 1
    return RegularityEstimate(
        c_hat=c_hat, points_used=used, points_skipped=skipped,
        min_violation=min_violation, vacuous=used == 0,
        provenance="grid-ratio-exact-distance" if exact else "grid-ratio")


@dataclass
class GapBounds:
    """Grid evaluation of a relaxation gain/penalty and its smoothness bound."""

    kind: str  # "exterior" (relaxation gain) or "interior" (tightening cost)
    gamma: float
    value: float
    upper_bound: float
    local_modulus: float
    radius: float
    zero_condition: bool
    approximate: bool = True
    details: dict = field(default_factory=dict)


def _local_modulus(points: np.ndarray, values: np.ndarray, alpha: float,
                   norm: str) -> float:
    """sup |f(x) - f(y)| / ||x - y||^alpha over pairs of grid points."""
    best = 0.0
    for g in range(len(points) - 1):
        d = dists_to(points[g + 1:], points[g], norm) ** alpha
        ok = d > 0
        if np.any(ok):
            best = max(best, float(np.max(np.abs(values[g + 1:][ok] - values[g]) / d[ok])))
    return best


def gap_bounds(program: StochasticProgram, gamma: float, c: float, h: float,
               kind: str = "exterior", tol_opt: float = 1e-9) -> GapBounds:
    """Evaluate the relaxation gap at level gamma and its Holder bound.

    ``exterior`` measures how much the optimum improves when constraints are
    relaxed to level gamma; ``interior`` measures how much it degrades when
    they are tightened to -gamma.  The bound is (local modulus) * (c*gamma)^
    alpha_0 with the modulus minimized over grid minimizers of the relaxed
    (resp. original) problem, per the metric-regularity argument.
    """
    if gamma <= 0:
        raise ConfigError("gap levels must be positive", gamma=gamma)
    if kind not in ("exterior", "interior"):
        raise ConfigError(f"unknown gap kind {kind!r}")
    space = program.space
    grid = space.grid(h)
    f_vals = program.true_fn_grid(0, grid)
    worst = np.full(len(grid), -np.inf)
    for i in range(1, program.n_constraints + 1):
        worst = np.maximum(worst, program.true_fn_grid(i, grid))
    if program.n_constraints == 0:
        worst = np.zeros(len(grid))
    feas = worst <= 1e-12
    if not np.any(feas):
        raise EmptySampleError("population feasible set has no grid points", h=h)
    f_star = float(f_vals[feas].min())

    if kind == "exterior":
        relaxed = worst <= gamma + 1e-12
        value = f_star - float(f_vals[relaxed].min())
        anchor_mask = relaxed & (f_vals <= f_vals[relaxed].min() + tol_opt)
        zero = bool(np.any(anchor_mask & feas))
    else:
        inner = worst <= -gamma + 1e-12
        if not np.any(inner):
            raise SlaterMarginError(
                "no grid point satisfies the tightened constraints; gamma "
                "exceeds the attainable margin", gamma=gamma)
        value = float(f_vals[inner].min()) - f_star
        anchor_mask = feas & (f_vals <= f_star + tol_opt)
        zero = bool(np.any(anchor_mask & inner))

    alpha0 = program.holder[0].alpha
    radius = c * gamma
    best_mod = math.inf
    for z in grid[anchor_mask]:
        in_ball = dists_to(grid, z, space.norm) <= radius + 1e-12
        pts, vals = grid[in_ball], f_vals[in_ball]
        if len(pts) < 2:
            best_mod = min(best_mod, 0.0)
            continue
        best_mod = min(best_mod, _local_modulus(pts, vals, alpha0, space.norm))
    if not math.isfinite(best_mod):
        best_mod = 0.0
    return GapBounds(kind=kind, gamma=gamma, value=max(value, 0.0),
                     upper_bound=best_mod * radius ** alpha0,
                     local_modulus=best_mod, radius=radius,
                     zero_condition=zero,
                     details={"f_star_grid": f_star, "grid_points": len(grid),
                              "anchor_candidates": int(anchor_mask.sum())})


# ---------------------------------------------------------------------------
# deviation ledgers


@dataclass
class DeviationLedger:
    """Grid suprema of empirical-population deviations, ready for checking.

    All suprema are over the supplied grid (optionally augmented with exact
    probe points); conclusions drawn from them are exact for the grid
    problem and approximate for the continuum one.
    """

    gamma: float
    h: float
    tol_active: float
    m: int
    anchors: dict
    delta_at: dict           # anchor name -> (m,) upward deviations at the point
    delta_obj_at: dict       # anchor name -> objective upward deviation
    Delta_Y: np.ndarray      # (m,) downward deviations over the hard set
    levels: list             # levels at which active-set deviations were taken
    Delta_active: list       # per level: (m,) array
    Delta0: dict             # (anchor name, level index) -> anchored objective dev
    grid_size: int = 0
    details: dict = field(default_factory=dict)

    def _level_index(self, level: float) -> int:
        for j, lv in enumerate(self.levels):
            if abs(lv - level) <= 1e-12:
                return j
        raise KeyError(f"ledger has no level {level}; have {self.levels}")

    def delta(self, name: str) -> np.ndarray:
        return self.delta_at[name]

    def Delta_gamma(self, level: float) -> np.ndarray:
        return self.Delta_active[self._level_index(level)]

    def Delta0_at(self, name: str, level: float) -> float:
        return self.Delta0[(name, self._level_index(level))]


def deviation_ledger(emp: EmpiricalProblem, gamma: float, h: float,
                     anchors: dict, probes: np.ndarray | None = None,
                     levels: tuple = None, tol_active: float | None = None) -> DeviationLedger:
    """Tabulate the deviation suprema the deterministic checker consumes.

    ``probes`` are extra evaluation points appended to the grid (e.g. exact
    boundary roots, so that sups over active sets are continuum-exact for
    piecewise-affine trials).  ``levels`` defaults to (gamma, 0).
    """
    program = emp.program
    m = program.n_constraints
    grid = program.space.grid(h)
    if probes is not None:
        grid = np.vstack([grid, np.atleast_2d(np.asarray(probes, dtype=float))])
    if levels is None:
        levels = (gamma, 0.0) if abs(gamma) > 1e-12 else (0.0,)
    levels = list(dict.fromkeys(float(lv) for lv in levels))
    tol_active = h if tol_active is None else tol_active

    f_true = np.stack([program.true_fn_grid(i, grid) for i in range(m + 1)])
    f_hat = np.stack([emp.fhat_grid(i, grid) for i in range(m + 1)])

    Delta_Y = np.array([max(0.0, float(np.max(f_true[i] - f_hat[i])))
                        for i in range(1, m + 1)]) if m else np.zeros(0)

    worst = np.max(f_true[1:], axis=0) if m else np.zeros(len(grid))
    Delta_active = []
    level_masks = []
    for lv in levels:
        in_level = worst <= lv + 1e-12
        level_masks.append(in_level)
        row = np.zeros(m)
        for i in range(1, m + 1):
            active = in_level & (np.abs(f_true[i] - lv) <= tol_active)
            if np.any(active):
                row[i - 1] = max(0.0, float(np.max(lv - f_hat[i][active])))
        Delta_active.append(row)

    delta_at, delta_obj_at, Delta0 = {}, {}, {}
    for name, pt in anchors.items():
        pt = np.asarray(pt, dtype=float)
        devs = np.array([max(0.0, emp.fhat(i, pt) - program.true_fn(i, pt))
                         for i in range(1, m + 1)])
        delta_at[name] = devs
        delta_obj_at[name] = max(0.0, emp.fhat(0, pt) - program.true_fn(0, pt))
        f_z, fh_z = program.true_fn(0, pt), emp.fhat(0, pt)
        for j, mask in enumerate(level_masks):
            if np.any(mask):
                shifted = (f_true[0][mask] - f_z) - (f_hat[0][mask] - fh_z)
                Delta0[(name, j)] = max(0.0, float(np.max(shifted)))
            else:
                Delta0[(name, j)] = 0.0

    return DeviationLedger(gamma=gamma, h=h, tol_active=tol_active, m=m,
                           anchors={k: np.asarray(v, dtype=float)
                                    for k, v in anchors.items()},
                           delta_at=delta_at, delta_obj_at=delta_obj_at,
                           Delta_Y=Delta_Y, levels=levels,
                           Delta_active=Delta_active, Delta0=Delta0,
                           grid_size=len(grid))


# ---------------------------------------------------------------------------
# the deterministic checker


@dataclass
class Condition:
    name: str
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


@dataclass
class Hypothesis:
    name: str
    ok: bool
    note: str = ""


@dataclass
class CheckReport:
    scheme: str
    conditions: list
    hypotheses: list
    conclusions: list
    params: dict

    @property
    def holds(self) -> bool:
        return (all(c.ok for c in self.conditions)
                and all(hyp.ok for hyp in self.hypotheses))

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "holds": self.holds,
            "conditions": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs,
                            "ok": c.ok} for c in self.conditions],
            "hypotheses": [{"name": hyp.name, "ok": hyp.ok, "note": hyp.note}
                           for hyp in self.hypotheses],
            "conclusions": list(self.conclusions) if self.holds else [],
            "params": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                       for k, v in self.params.items()},
        }


CHECK_SCHEMES = ("F", "C1C2", "C1plusC2", "C1negC2neg", "M0", "P",
                 "exterior", "exterior_convex", "interior")


def check_certificates(emp: EmpiricalProblem, ledger: DeviationLedger,
                       scheme: str, params: dict | None = None) -> CheckReport:
    """Evaluate one deterministic certificate scheme against a ledger.

    Conclusions are reported only when every hypothesis and inequality
    holds; each condition carries its numeric left- and right-hand sides so
    failures are inspectable.
    """
    params = dict(params or {})
    program = emp.program
    m = program.n_constraints
    eps_hat = emp.relaxations
    gamma = params.get("gamma", ledger.gamma)
    conds: list[Condition] = []
    hyps: list[Hypothesis] = []
    concl: list[str] = []

    def anchor(name_key: str, default: str) -> str:
        name = params.get(name_key, default)
        if name not in ledger.anchors:
            raise ConfigError(f"ledger has no anchor {name!r}",
                              available=sorted(ledger.anchors))
        return name

    def true_cons(pt) -> np.ndarray:
        return np.array([program.true_fn(i, pt) for i in range(1, m + 1)])

    if scheme == "F":
        hyps.append(Hypothesis("gamma-nonnegative", gamma >= 0,
                               f"gamma={gamma}"))
        for i in range(m):
            conds.append(Condition(f"F[{i + 1}]", float(ledger.Delta_Y[i]),
                                   gamma - float(eps_hat[i])))
        concl.append(f"subset-relaxed: every empirically feasible point "
                     f"satisfies all constraints at level {gamma}")

    elif scheme == "C1C2":
        eps_mid = params["eps_mid"]
        y = anchor("y", "y")
        fy = true_cons(ledger.anchors[y])
        hyps.append(Hypothesis("convexity-attested", bool(program.convex)))
        hyps.append(Hypothesis("slack-point", bool(np.all(fy < eps_mid)) and eps_mid < gamma,
                               f"needs f_i(y) < {eps_mid} < {gamma}; "
                               f"max f_i(y) = {fy.max() if m else float('-inf')}"))
        dg = ledger.Delta_gamma(gamma)
        dy = ledger.delta(y)
        for i in range(m):
            conds.append(Condition(f"C1[{i + 1}]", float(dg[i] + dy[i]),
                                   gamma - eps_mid))
            conds.append(Condition(f"C2[{i + 1}]", float(dg[i]),
                                   gamma - float(eps_hat[i])))
        concl.append(f"subset-relaxed: every empirically feasible point "
                     f"satisfies all constraints at level {gamma}")

    elif scheme == "C1plusC2":
        y = anchor("y", "y")
        fy = true_cons(ledger.anchors[y])
        hyps.append(Hypothesis("convexity-attested", bool(program.convex)))
        hyps.append(Hypothesis("gamma-positive", gamma > 0, f"gamma={gamma}"))
        hyps.append(Hypothesis("interior-at-half-level",
                               bool(np.all(fy < gamma / 2)),
                               f"needs f_i(y) < gamma/2 = {gamma / 2}; "
                               f"max f_i(y) = {fy.max() if m else float('-inf')}"))
        dg = ledger.Delta_gamma(gamma)
        dy = ledger.delta(y)
        for i in range(m):
            conds.append(Condition(f"C1+[{i + 1}]", float(dg[i] + dy[i]),
                                   gamma / 2))
            conds.append(Condition(f"C2[{i + 1}]", float(dg[i]),
                                   gamma - float(eps_hat[i])))
        concl.append(f"subset-relaxed: every empirically feasible point "
                     f"satisfies all constraints at level {gamma}")

    elif scheme == "C1negC2neg":
        margin = params["slater_margin"]
        y = anchor("y", "y")
        fy = true_cons(ledger.anchors[y])
        hyps.append(Hypothesis("convexity-attested", bool(program.convex)))
        hyps.append(Hypothesis("level-within-margin", 0 < gamma <= margin + 1e-12,
                               f"needs 0 < gamma <= {margin}, got {gamma}"))
        hyps.append(Hypothesis("interior-point", bool(np.all(fy < -gamma)),
                               f"needs f_i(y) < -gamma = {-gamma}; "
                               f"max f_i(y) = {fy.max() if m else float('-inf')}"))
        d0 = ledger.Delta_gamma(0.0)
        dy = ledger.delta(y)
        for i in range(m):
            conds.append(Condition(f"C1-[{i + 1}]", float(d0[i] + dy[i]), gamma))
            conds.append(Condition(f"C2-[{i + 1}]", float(d0[i]),
                                   -float(eps_hat[i])))
        concl.append("subset-hard: every empirically feasible point "
                     "satisfies every constraint exactly")

    elif scheme == "M0":
        t, t1 = params["t"], params.get("t1", 0.0)
        x_star = anchor("x_star", "x_star")
        hyps.append(Hypothesis("no-stochastic-constraints", m == 0,
                               f"scheme M0 needs m=0, got m={m}"))
        hyps.append(Hypothesis("tolerances-ordered", 0 <= t1 <= t,
                               f"t={t}, t1={t1}"))
        conds.append(Condition("M0", ledger.Delta0_at(x_star, 0.0), t - t1))
        concl.append(f"near-optimal-subset: every {t1}-near empirical "
                     f"minimizer is {t}-near optimal")

    elif scheme == "P":
        x_star = anchor("x_star", "x_star")
        dev = ledger.delta(x_star)
        for i in range(m):
            conds.append(Condition(f"P[{i + 1}]", float(dev[i]),
                                   float(eps_hat[i])))
        concl.append("anchor-feasible: the anchored minimizer is "
                     "empirically feasible")

    elif scheme == "exterior":
        t, t1 = params["t"], params.get("t1", 0.0)
        x_star = anchor("x_star", "x_star")
        hyps.append(Hypothesis("gamma-nonnegative", gamma >= 0, f"gamma={gamma}"))
        hyps.append(Hypothesis("tolerances-ordered", 0 <= t1 <= t,
                               f"t={t}, t1={t1}"))
        fx = true_cons(ledger.anchors[x_star])
        hyps.append(Hypothesis("anchor-in-feasible-set",
                               bool(np.all(fx <= 1e-9)),
                               "x_star must satisfy the population "
                               "constraints (optimality is attested)"))
        dev = ledger.delta(x_star)
        for i in range(m):
            conds.append(Condition(f"F[{i + 1}]", float(ledger.Delta_Y[i]),
                                   gamma - float(eps_hat[i])))
            conds.append(Condition(f"P[{i + 1}]", float(dev[i]),
                                   float(eps_hat[i])))
        conds.append(Condition("M", ledger.Delta0_at(x_star, gamma), t - t1))
        concl.append(f"subset-relaxed: every empirically feasible point "
                     f"satisfies all constraints at level {gamma}")
        concl.append("anchor-feasible: the population minimizer is "
                     "empirically feasible")
        concl.append(f"near-optimal-value: every {t1}-near empirical "
                     f"minimizer costs at most the true optimum + {t}")

    elif scheme == "exterior_convex":
        t, t1 = params["t"], params.get("t1", 0.0)
        x_star = anchor("x_star", "x_star")
        y = anchor("y", "y")
        fy = true_cons(ledger.anchors[y])
        fx = true_cons(ledger.anchors[x_star])
        hyps.append(Hypothesis("convexity-attested", bool(program.convex)))
        hyps.append(Hypothesis("gamma-positive", gamma > 0, f"gamma={gamma}"))
        hyps.append(Hypothesis("tolerances-ordered", 0 <= t1 <= t,
                               f"t={t}, t1={t1}"))
        hyps.append(Hypothesis("interior-at-half-level",
                               bool(np.all(fy < gamma / 2)),
                               f"needs f_i(y) < gamma/2 = {gamma / 2}; "
                               f"max f_i(y) = {fy.max() if m else float('-inf')}"))
        hyps.append(Hypothesis("anchor-in-feasible-set",
                               bool(np.all(fx <= 1e-9)),
                               "x_star must satisfy the population constraints"))
        dg = ledger.Delta_gamma(gamma)
        dy = ledger.delta(y)
        dev = ledger.delta(x_star)
        for i in range(m):
            conds.append(Condition(f"C1+[{i + 1}]", float(dg[i] + dy[i]),
                                   gamma / 2))
            conds.append(Condition(f"C2[{i + 1}]", float(dg[i]),
                                   gamma - float(eps_hat[i])))
            conds.append(Condition(f"P[{i + 1}]", float(dev[i]),
                                   float(eps_hat[i])))
        conds.append(Condition("M", ledger.Delta0_at(x_star, gamma), t - t1))
        concl.append(f"subset-relaxed: every empirically feasible point "
                     f"satisfies all constraints at level {gamma}")
        concl.append("anchor-feasible: the population minimizer is "
                     "empirically feasible")
        concl.append(f"near-optimal-value: every {t1}-near empirical "
                     f"minimizer costs at most the true optimum + {t}")

    elif scheme == "interior":
        t, t1 = params["t"], params.get("t1", 0.0)
        margin = params["slater_margin"]
        y = anchor("y", "y")
        y_star = anchor("y_star", "y_star")
        fy = true_cons(ledger.anchors[y])
        fys = true_cons(ledger.anchors[y_star])
        hyps.append(Hypothesis("convexity-attested", bool(program.convex)))
        hyps.append(Hypothesis("level-within-margin", 0 < gamma <= margin + 1e-12,
                               f"needs 0 < gamma <= {margin}, got {gamma}"))
        hyps.append(Hypothesis("tolerances-ordered", 0 <= t1 <= t,
                               f"t={t}, t1={t1}"))
        hyps.append(Hypothesis("interior-point", bool(np.all(fy < -gamma)),
                               f"needs f_i(y) < -gamma = {-gamma}; "
                               f"max f_i(y) = {fy.max() if m else float('-inf')}"))
        hyps.append(Hypothesis("anchor-in-tightened-set",
                               bool(np.all(fys <= -gamma + 1e-9)),
                               "y_star must satisfy constraints at -gamma "
                               "(its optimality there is attested)"))
        d0 = ledger.Delta_gamma(0.0)
        dy = ledger.delta(y)
        dys = ledger.delta(y_star)
        for i in range(m):
            conds.append(Condition(f"C1-[{i + 1}]", float(d0[i] + dy[i]), gamma))
            conds.append(Condition(f"C2-[{i + 1}]", float(d0[i]),
                                   -float(eps_hat[i])))
            conds.append(Condition(f"P-[{i + 1}]", float(dys[i]),
                                   gamma + float(eps_hat[i])))
        conds.append(Condition("M-", ledger.Delta0_at(y_star, 0.0), t - t1))
        concl.append("subset-hard: every empirically feasible point "
                     "satisfies every constraint exactly")
        concl.append("anchor-feasible: the tightened-problem minimizer is "
                     "empirically feasible")
        concl.append(f"near-optimal-subset: every {t1}-near empirical "
                     f"minimizer is within {t} + (tightening cost at "
                     f"{gamma}) of optimal")

    else:
        raise ConfigError(f"unknown checker scheme {scheme!r}",
                          allowed=list(CHECK_SCHEMES))

    report = CheckReport(scheme=scheme, conditions=conds, hypotheses=hyps,
                         conclusions=concl, params=params)
    if not report.holds:
        report.conclusions = []
    return report
