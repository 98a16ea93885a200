"""Pipeline orchestration: run every construction stage, certify every
clause, and assemble a machine-readable verification report.

Each check carries the clause label it certifies (anchor), the worst margin
found, and the location of that worst margin. Strict checks pass when the
margin exceeds an absolute floor of 1e-12; tolerance checks when it is
positive; non-strict checks when it is non-negative. Margins of the
quadratically-degenerate threshold inequalities (and of the slope bound of
Lemma 2.15) are reported per unit x^2, since their raw two-sided gaps
vanish like x^2 at the left end of the grid by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import boundary_metric, rho_interval, t_of_s
from .bumps import build_gamma
from .curvature import curvature_grid, intrinsic_sectional
from .errors import CertificationError, RicciForgeError
from .grids import GridSpec, open_grid
from .paramgen import (
    LemmaId,
    ParamSet,
    lemma_margin,
    lemma_margin_scale,
    select_params,
    star_margin,
)
from .profile import (
    ProfileC1,
    build_bridge_theta,
    smooth_profile,
    validate_c1,
)

SCHEMA = "ricci-forge/1"
DEFAULT_POINTS = 10_000
STRICT_FLOOR = 1e-12
RICCI_EPS = 1e-6
GAUSS_TOL = 1e-4
ANGLE_TOL = 1e-8

STRICT, NONNEG, TOL = "strict", "nonneg", "tol"

# Canonical check set: fixed names, clause anchors, pass rules.
CHECK_TABLE = (
    ("parameter_invariants", "Definitions 2.1/2.7/2.8; Lemmas 2.11/2.12", NONNEG),
    ("lemma_2_2_grid", "Lemma 2.2", STRICT),
    ("lemma_2_3_grid", "Lemma 2.3", STRICT),
    ("lemma_2_4_grid", "Lemma 2.4", STRICT),
    ("lemma_2_5_grid", "Lemma 2.5", STRICT),
    ("lemma_2_6i_grid", "Lemma 2.6(i)", STRICT),
    ("lemma_2_6ii_grid", "Lemma 2.6(ii)", STRICT),
    ("lemma_2_6iii_grid", "Lemma 2.6(iii)", STRICT),
    ("gamma_first_derivative_bound", "Definition 2.7", STRICT),
    ("gamma_second_derivative_bound", "Definition 2.7", STRICT),
    ("star_inequality_at_psi", "Lemma 2.9 proof (*)", STRICT),
    ("c1_join_inner", "Lemma 2.9", TOL),
    ("c1_join_outer", "Lemma 2.9", TOL),
    ("lemma_2_9_iii", "Lemma 2.9(iii)", NONNEG),
    ("lemma_2_10", "Lemma 2.10", STRICT),
    ("lemma_2_13_a", "Lemma 2.13(a)", STRICT),
    ("lemma_2_13_b", "Lemma 2.13(b)", STRICT),
    ("lemma_2_13_c", "Lemma 2.13(c)", STRICT),
    ("corollary_2_14_concavity", "Corollary 2.14", STRICT),
    ("corollary_2_14_ratio", "Corollary 2.14", STRICT),
    ("lemma_2_15", "Lemma 2.15", STRICT),
    ("ricci_tt_positive", "Proposition 2.19", STRICT),
    ("ricci_xx_positive", "Proposition 2.19", STRICT),
    ("ricci_ss_positive", "Proposition 2.19", STRICT),
    ("corollary_2_16_bound", "Corollary 2.16", NONNEG),
    ("lemma_2_17_bound", "Lemma 2.17", STRICT),
    ("lemma_2_18_bound", "Lemma 2.18", STRICT),
    ("gauss_crosscheck", "Lemmas 2.17/2.18 via the Gauss equation", TOL),
    ("angle_identity", "boundary angle identity (spherical trigonometry)", TOL),
    ("tau_below_r0", "Proposition 2.19 proof; Lemma 2.3 at x = r0", STRICT),
    ("omega_exceeds_tau_power", "Propositions 2.19/2.20", STRICT),
    ("rho_interval_nonempty", "Corollary 2.22; Proposition 1.12 proof", STRICT),
    ("r0_disjointness", "Proposition 2.19 proof (disjoint balls)", STRICT),
)

CHECK_NAMES = tuple(name for name, _, _ in CHECK_TABLE)
_ANCHORS = {name: anchor for name, anchor, _ in CHECK_TABLE}
_KINDS = {name: kind for name, _, kind in CHECK_TABLE}


@dataclass(frozen=True)
class CheckResult:
    name: str
    anchor: str
    passed: bool
    margin: float | None
    at: float | None
    cause: str | None = None


@dataclass(frozen=True)
class VerificationReport:
    params: ParamSet | None
    checks: tuple
    overall: bool
    artifacts: dict = field(default_factory=dict, repr=False, compare=False)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _passes(kind: str, margin: float) -> bool:
    if not math.isfinite(margin):
        return False
    if kind == STRICT:
        return margin > STRICT_FLOOR
    if kind == NONNEG:
        return margin >= 0.0
    return margin > 0.0


def _result(name: str, margin: float | None, at: float | None,
            cause: str | None = None) -> CheckResult:
    if margin is None or not math.isfinite(margin):
        return CheckResult(name, _ANCHORS[name], False, None, at, cause)
    return CheckResult(name, _ANCHORS[name], _passes(_KINDS[name], margin),
                       float(margin), at, cause)


def _refined_min(xs: np.ndarray, vals: np.ndarray, fn=None):
    """Grid minimum with one parabolic refinement of the argmin (pass/fail is
    decided on the refined value when it is lower)."""
    i = int(np.argmin(vals))
    best_v, best_x = float(vals[i]), float(xs[i])
    if fn is not None and 0 < i < xs.size - 1:
        x0, x1, x2 = xs[i - 1], xs[i], xs[i + 1]
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = (y0 - 2.0 * y1 + y2)
        if denom > 0.0:
            xv = x1 + 0.5 * (x2 - x1) * (y0 - y2) / denom
            xv = min(max(xv, x0), x2)
            yv = float(fn(xv))
            if yv < best_v:
                best_v, best_x = yv, float(xv)
    return best_v, best_x


# ---------------------------------------------------------------------------
# Individual checks
# ---------------------------------------------------------------------------

def _param_slacks(params: ParamSet) -> float:
    p = params
    caps = min(p.R0, math.pi / (2.0 * (1.0 + p.Lambda)), *p.c)
    slacks = [
        0.1 - p.R0,
        p.kappa - 2.0 / math.sqrt(3.0 * p.R0),
        p.zeta - p.kappa,
        3.0 * p.R0 * p.kappa**3 / 4.0 - p.zeta,
        p.Lambda - 1.0 / p.R0,
        caps - p.r0,
        math.pi / p.p - p.r0,
        p.psi,
        p.t_cut - p.psi,
        star_margin(p.R0, p.kappa, p.zeta, p.r0, p.psi),
        p.iota,
        p.psi - p.mu0,
        p.iota - p.mu0 * math.tan(p.r0),
        p.mu,
        p.mu0 - p.mu,
    ]
    return float(min(slacks))


def _lemma_grid_check(name: str, lemma: LemmaId, params: ParamSet, points: int) -> CheckResult:
    consts = {"R0": params.R0, "kappa": params.kappa, "zeta": params.zeta}
    xs = open_grid(0.0, params.r0, points, open_lo=True)
    vals = lemma_margin(lemma, xs, consts) / lemma_margin_scale(lemma, xs)

    def fn(x):
        return float(lemma_margin(lemma, x, consts) / lemma_margin_scale(lemma, x))

    margin, at = _refined_min(xs, vals, fn)
    return _result(name, margin, at)


def gauss_crosscheck(profile, params: ParamSet, n: int | None = None,
                     grid: GridSpec | None = None) -> CheckResult:
    """Compare the closed-form boundary sectional curvatures against finite
    differences of the unrescaled boundary warping B(s) = R(t(s)); the two
    routes are independent, so agreement validates the closed forms."""
    r0 = params.r0
    length = math.pi * math.sin(r0)
    points = grid.points if grid is not None else 2_000
    lo = grid.lo if grid is not None else 0.05 * length
    hi = grid.hi if grid is not None else 0.95 * length
    s = np.linspace(lo, hi, points)
    h = 1e-4 * math.sin(r0)

    def B(sv):
        return profile.value(t_of_s(r0, sv))

    b0 = B(s)
    bp = B(s + h)
    bm = B(s - h)
    d1 = (bp - bm) / (2.0 * h)
    d2 = (bp - 2.0 * b0 + bm) / h**2

    ts = t_of_s(r0, s)
    ki_ys, ki_ss = intrinsic_sectional(profile, r0, ts)
    rel_ys = np.abs(ki_ys - (-d2 / b0)) / np.abs(ki_ys)
    rel_ss = np.abs(ki_ss - (1.0 - d1**2) / b0**2) / np.abs(ki_ss)
    worst = np.maximum(rel_ys, rel_ss)
    i = int(np.argmax(worst))
    return _result("gauss_crosscheck", GAUSS_TOL - float(worst[i]), float(s[i]))


def _angle_identity_check(r0: float, points: int) -> CheckResult:
    length = math.pi * math.sin(r0)
    h = 1e-6 * length
    s = np.linspace(2.0 * h, length - 2.0 * h, points)
    dt_ds = (t_of_s(r0, s + h) - t_of_s(r0, s - h)) / (2.0 * h)
    ts = t_of_s(r0, s)
    err = np.abs(dt_ds**2 + (np.tan(ts) / math.tan(r0)) ** 2 - 1.0)
    i = int(np.argmax(err))
    return _result("angle_identity", ANGLE_TOL - float(err[i]), float(s[i]))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _skipped(names, cause):
    return {
        name: CheckResult(name, _ANCHORS[name], False, None, None,
                          cause=f"skipped: {cause}")
        for name in names
    }


def _error_text(e: Exception) -> str:
    clause = getattr(e, "clause", None) or getattr(e, "check", None)
    return f"{clause}: {e}" if clause else str(e)


def run_verification(n: int, p: int, overrides=None,
                     grid: GridSpec | None = None) -> VerificationReport:
    """Run the full construction for (n, p) and certify every clause.

    Constructor failures become failing checks (never exceptions); checks
    whose inputs failed upstream are reported failed with a cause pointer.
    """
    points = grid.points if grid is not None else DEFAULT_POINTS
    results: dict[str, CheckResult] = {}
    artifacts: dict = {}

    names_after_params = [nm for nm in CHECK_NAMES if nm != "parameter_invariants"]
    try:
        params = select_params(n, p, overrides, points=points)
    except RicciForgeError as e:
        cause = _error_text(e)
        results["parameter_invariants"] = CheckResult(
            "parameter_invariants", _ANCHORS["parameter_invariants"],
            False, None, None, cause=cause)
        results.update(_skipped(names_after_params,
                                f"parameter cascade failed ({cause})"))
        return _assemble(None, results, artifacts)

    artifacts["params"] = params
    results["parameter_invariants"] = _result("parameter_invariants",
                                              _param_slacks(params), None)

    lemma_checks = (
        ("lemma_2_2_grid", LemmaId.L2_2), ("lemma_2_3_grid", LemmaId.L2_3),
        ("lemma_2_4_grid", LemmaId.L2_4), ("lemma_2_5_grid", LemmaId.L2_5),
        ("lemma_2_6i_grid", LemmaId.L2_6i), ("lemma_2_6ii_grid", LemmaId.L2_6ii),
        ("lemma_2_6iii_grid", LemmaId.L2_6iii),
    )
    for name, lemma in lemma_checks:
        results[name] = _lemma_grid_check(name, lemma, params, points)

    gamma = build_gamma(params.R0, params.Lambda)
    (g1, at1), (g2, at2) = gamma.derivative_sups()
    results["gamma_first_derivative_bound"] = _result(
        "gamma_first_derivative_bound", params.R0 - g1, at1)
    results["gamma_second_derivative_bound"] = _result(
        "gamma_second_derivative_bound", params.R0 - g2, at2)

    results["star_inequality_at_psi"] = _result(
        "star_inequality_at_psi",
        star_margin(params.R0, params.kappa, params.zeta, params.r0, params.psi),
        params.psi)

    results["r0_disjointness"] = _result(
        "r0_disjointness", math.pi / params.p - params.r0, params.r0)

    profile_names = [
        "c1_join_inner", "c1_join_outer", "lemma_2_9_iii", "lemma_2_10",
        "lemma_2_13_a", "lemma_2_13_b", "lemma_2_13_c",
        "corollary_2_14_concavity", "corollary_2_14_ratio", "lemma_2_15",
    ]
    downstream_names = [
        "ricci_tt_positive", "ricci_xx_positive", "ricci_ss_positive",
        "corollary_2_16_bound", "lemma_2_17_bound", "lemma_2_18_bound",
        "gauss_crosscheck", "angle_identity", "tau_below_r0",
        "omega_exceeds_tau_power", "rho_interval_nonempty",
    ]

    smooth = None
    try:
        bridge = build_bridge_theta(params)
        base = ProfileC1(params=params, bump=gamma, bridge=bridge)
        c1_margins = validate_c1(base, points)
        for name in ("c1_join_inner", "c1_join_outer", "lemma_2_9_iii", "lemma_2_10"):
            m, at = c1_margins[name]
            results[name] = _result(name, m, at)
        smooth = smooth_profile(base, params.mu, points=points)
        rep = smooth.smoothing_report
        for name in ("lemma_2_13_a", "lemma_2_13_b", "lemma_2_13_c",
                     "corollary_2_14_concavity", "corollary_2_14_ratio"):
            m, at = rep[name]
            results[name] = _result(name, m, at)
        artifacts["profile"] = smooth
    except RicciForgeError as e:
        cause = _error_text(e)
        pending = [nm for nm in profile_names if nm not in results]
        for name, (m, at) in getattr(e, "margins", {}).items():
            if name in profile_names:
                results[name] = _result(name, m, at, cause=cause)
                if name in pending:
                    pending.remove(name)
        results.update(_skipped(pending, f"profile construction failed ({cause})"))
        results.update(_skipped(downstream_names,
                                f"profile construction failed ({cause})"))
        return _assemble(params, results, artifacts)

    # curvature checks on the union of the interior grid and the boundary grid
    r0 = params.r0
    t_curv = np.unique(np.concatenate([
        np.linspace(RICCI_EPS, math.pi / 2, points),
        np.linspace(0.0, r0, points),
    ]))
    curv = curvature_grid(smooth, params.n, r0, t_curv)
    artifacts["t_grid"] = t_curv
    artifacts["curvature"] = curv

    for name, col in (("ricci_tt_positive", curv.ric_tt),
                      ("ricci_xx_positive", curv.ric_xx),
                      ("ricci_ss_positive", curv.ric_ss)):
        m, at = _refined_min(t_curv, col)
        results[name] = _result(name, m, at)

    # slope-bound margin reported per unit t^2: the raw two-sided gap
    # vanishes quadratically at the pole by construction
    mpos = (t_curv > 0.0) & (t_curv <= r0 + 1e-15)
    tp = t_curv[mpos]
    vals = (1.0 - (smooth.d1(tp) / smooth.value(tp)) * np.tan(tp)) / tp**2
    m, at = _refined_min(tp, vals)
    results["lemma_2_15"] = _result("lemma_2_15", m, at)

    mb = t_curv <= r0 + 1e-15
    tb = t_curv[mb]
    cot_r0 = 1.0 / math.tan(r0)
    pc_worst = np.minimum(curv.pc_circle[mb], curv.pc_sphere[mb]) + cot_r0
    m, at = _refined_min(tb, pc_worst)
    results["corollary_2_16_bound"] = _result("corollary_2_16_bound", m, at)
    for name, col in (("lemma_2_17_bound", curv.ki_ys),
                      ("lemma_2_18_bound", curv.ki_ss)):
        m, at = _refined_min(tb, col[mb] - cot_r0**2)
        results[name] = _result(name, m, at)

    results["gauss_crosscheck"] = gauss_crosscheck(smooth, params)
    results["angle_identity"] = _angle_identity_check(r0, min(points, 2_000))

    bm = boundary_metric(smooth, params, GridSpec(points=points, lo=0.0,
                                                  hi=math.pi * math.cos(r0)))
    artifacts["boundary"] = bm
    results["tau_below_r0"] = _result("tau_below_r0", params.R0 - bm.tau, None)
    results["omega_exceeds_tau_power"] = _result(
        "omega_exceeds_tau_power", bm.omega - bm.rho_lo, None)
    try:
        lo, hi = rho_interval(bm, params.n)
        margin = min(hi - lo, 0.5 - lo)
        results["rho_interval_nonempty"] = _result("rho_interval_nonempty",
                                                   margin, None)
        artifacts["rho"] = (lo, hi)
    except CertificationError as e:
        results["rho_interval_nonempty"] = CheckResult(
            "rho_interval_nonempty", _ANCHORS["rho_interval_nonempty"],
            False, None, None, cause=_error_text(e))

    return _assemble(params, results, artifacts)


def _assemble(params, results, artifacts) -> VerificationReport:
    missing = [nm for nm in CHECK_NAMES if nm not in results]
    if missing:
        raise RuntimeError(f"internal error: checks never emitted: {missing}")
    checks = tuple(results[nm] for nm in CHECK_NAMES)
    overall = all(c.passed for c in checks)
    return VerificationReport(params=params, checks=checks, overall=overall,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _json_num(x):
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def report_to_dict(report: VerificationReport) -> dict:
    return {
        "schema": SCHEMA,
        "params": report.params.as_dict() if report.params is not None else None,
        "checks": [
            {
                "name": c.name,
                "anchor": c.anchor,
                "passed": c.passed,
                "margin": _json_num(c.margin),
                "at": _json_num(c.at),
                "cause": c.cause,
            }
            for c in report.checks
        ],
        "overall": "pass" if report.overall else "fail",
    }


def report_to_json(report: VerificationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
