"""Selection and validation of the constant cascade that drives the
punctured-sphere construction.

The constants are chosen in the order R0, kappa, zeta, Lambda, r0, psi,
iota, mu0, mu; each choice is certified against the clause that constrains
it. The report and the exceptions carry the clause labels (for example
"Definition 2.1(c)" or "Lemma 2.12(iv)") so a failure always names the rule
it violated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .bumps import build_gamma
from .errors import CertificationError, ConfigurationError, DomainError
from .grids import GridSpec, open_grid

X_MAX = math.pi / 4
MIN_SCAN_POINTS = 10_000
BISECT_RTOL = 1e-8
SAFETY = 0.9

# psi is the largest dyadic fraction of r0^2/kappa keeping at least this
# share of the maximal chord-slope margin (the psi -> 0 limit).
PSI_RELATIVE_MARGIN = 1e-3
PSI_MAX_HALVINGS = 60


class LemmaId(str, Enum):
    L2_2 = "L2_2"
    L2_3 = "L2_3"
    L2_4 = "L2_4"
    L2_5 = "L2_5"
    L2_6i = "L2_6i"
    L2_6ii = "L2_6ii"
    L2_6iii = "L2_6iii"


LEMMA_ANCHOR = {
    LemmaId.L2_2: "Lemma 2.2",
    LemmaId.L2_3: "Lemma 2.3",
    LemmaId.L2_4: "Lemma 2.4",
    LemmaId.L2_5: "Lemma 2.5",
    LemmaId.L2_6i: "Lemma 2.6(i)",
    LemmaId.L2_6ii: "Lemma 2.6(ii)",
    LemmaId.L2_6iii: "Lemma 2.6(iii)",
}

_NEEDED = {
    LemmaId.L2_2: ("kappa", "zeta"),
    LemmaId.L2_3: ("zeta",),
    LemmaId.L2_4: ("kappa",),
    LemmaId.L2_5: ("R0", "kappa", "zeta"),
    LemmaId.L2_6i: ("R0", "kappa", "zeta"),
    LemmaId.L2_6ii: ("R0", "kappa", "zeta"),
    LemmaId.L2_6iii: ("R0", "kappa", "zeta"),
}

# Inequalities whose two sides merge quadratically as x -> 0; their grid
# margins are reported per unit x^2 (see lemma_margin_scale).
QUADRATIC_LEMMAS = frozenset(
    {LemmaId.L2_2, LemmaId.L2_3, LemmaId.L2_4, LemmaId.L2_6i, LemmaId.L2_6iii}
)


def _const(consts, name: str, lemma_id: LemmaId) -> float:
    if isinstance(consts, Mapping):
        value = consts.get(name)
    else:
        value = getattr(consts, name, None)
    if value is None:
        raise ConfigurationError(
            f"{LEMMA_ANCHOR[lemma_id]} needs constant {name!r}",
            clause=LEMMA_ANCHOR[lemma_id],
        )
    return float(value)


def lemma_bound_eval(lemma_id: LemmaId, x, consts):
    """Both sides of a threshold inequality, oriented so it asserts lhs < rhs.

    ``x`` may be a scalar or an array with entries in (0, pi/4].
    """
    lemma_id = LemmaId(lemma_id)
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    if np.any(xa <= 0.0) or np.any(xa > X_MAX + 1e-15):
        raise DomainError(f"x must lie in (0, pi/4], got {x!r}")
    needed = _NEEDED[lemma_id]
    R0 = _const(consts, "R0", lemma_id) if "R0" in needed else None
    kappa = _const(consts, "kappa", lemma_id) if "kappa" in needed else None
    zeta = _const(consts, "zeta", lemma_id) if "zeta" in needed else None
    if kappa is not None and np.any(xa**2 / kappa + xa**4 / (zeta or math.inf) >= math.pi / 2):
        raise DomainError("tan argument reaches pi/2; constants out of range")

    if lemma_id is LemmaId.L2_2:
        lhs = np.tan(xa**2 / kappa + xa**4 / zeta) / np.tan(xa**2 / kappa)
        rhs = 1.0 + np.tan(xa) ** 2
    elif lemma_id is LemmaId.L2_3:
        lhs = np.sin(xa + xa**4 / zeta) / np.tan(xa)
        rhs = np.ones_like(xa)
    elif lemma_id is LemmaId.L2_4:
        lhs = xa**2 / 2.0 + np.tan(xa**2 / kappa) ** 2
        rhs = np.tan(xa) ** 2
    elif lemma_id is LemmaId.L2_5:
        lhs = (R0 / zeta) / (1.0 - xa**3 * R0 / zeta) ** 2
        rhs = np.tan(xa**2 / kappa + xa**4 / zeta) / xa**2
    elif lemma_id is LemmaId.L2_6i:
        lhs = R0 * np.sin(xa**2 / kappa + xa**4 / zeta)
        rhs = (xa / 2.0) * np.sin(2.0 * xa / kappa)
    elif lemma_id is LemmaId.L2_6ii:
        lhs = R0 * np.cos(xa**2 / kappa + xa**4 / zeta)
        rhs = np.cos(2.0 * xa / kappa)
    else:  # L2_6iii
        lhs = ((xa / 2.0) * np.sin(2.0 * xa / kappa)
               - R0 * np.sin(xa**2 / kappa + xa**4 / zeta)) / (xa**2 / kappa)
        rhs = np.cos(2.0 * xa / kappa) - R0 * np.cos(xa**2 / kappa + xa**4 / zeta)
    if scalar:
        return float(lhs), float(rhs)
    return lhs, rhs


def lemma_margin(lemma_id: LemmaId, x, consts):
    """rhs - lhs of the oriented inequality (positive where it holds)."""
    lhs, rhs = lemma_bound_eval(lemma_id, x, consts)
    return rhs - lhs


def lemma_margin_scale(lemma_id: LemmaId, x):
    """Normalisation for reported grid margins.

    The two sides of the quadratically-degenerate inequalities merge like
    x^2 at the origin, so a raw minimum over a grid reaching down to x ~ 0
    only measures grid granularity; those margins are reported per unit x^2.
    """
    lemma_id = LemmaId(lemma_id)
    if lemma_id in QUADRATIC_LEMMAS:
        return np.asarray(x, dtype=float) ** 2
    return np.ones_like(np.asarray(x, dtype=float))


def _bisect(fn, lo: float, hi: float, rtol: float = BISECT_RTOL) -> float:
    flo = fn(lo)
    fhi = fn(hi)
    if flo <= 0.0:
        return lo
    if fhi > 0.0:
        return hi
    while hi - lo > rtol * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


DEFAULT_SCAN = GridSpec(points=MIN_SCAN_POINTS, lo=0.0, hi=X_MAX)


def threshold_scan(lemma_id: LemmaId, consts, scan: GridSpec | None = None) -> float:
    """Largest x below which a threshold inequality holds on a dense grid,
    refined by bisection at the first violation and discounted by a 0.9
    safety factor. Returns 0.9 * x_max when no violation is found."""
    lemma_id = LemmaId(lemma_id)
    spec = scan if scan is not None else DEFAULT_SCAN
    if spec.hi > X_MAX + 1e-15:
        raise ConfigurationError("scan range must stay within (0, pi/4]",
                                 clause="threshold_scan")
    if spec.points < MIN_SCAN_POINTS:
        raise ConfigurationError(
            f"scan resolution must be >= {MIN_SCAN_POINTS} points",
            clause="threshold_scan",
        )
    xs = open_grid(max(spec.lo, 0.0), spec.hi, spec.points, open_lo=True)
    margins = lemma_margin(lemma_id, xs, consts)
    bad = np.nonzero(margins <= 0.0)[0]
    if bad.size == 0:
        return SAFETY * spec.hi
    first = int(bad[0])
    if first == 0:
        raise CertificationError(
            f"{LEMMA_ANCHOR[lemma_id]} fails arbitrarily close to 0 "
            f"(margin {margins[0]!r} at x = {xs[0]!r})",
            check=LEMMA_ANCHOR[lemma_id],
        )
    root = _bisect(lambda v: float(lemma_margin(lemma_id, v, consts)),
                   float(xs[first - 1]), float(xs[first]))
    return SAFETY * root


def compute_iota(consts, points: int = 10_000) -> float:
    """Safety-discounted minimum of 1 - tan(t)/tan(t + r0^4/zeta) over
    [r0^2/kappa, r0]; must be positive."""
    r0 = _const(consts, "r0", LemmaId.L2_3)
    zeta = _const(consts, "zeta", LemmaId.L2_3)
    kappa = _const(consts, "kappa", LemmaId.L2_2)
    shift = r0**4 / zeta
    ts = np.linspace(r0**2 / kappa, r0, points)
    vals = 1.0 - np.tan(ts) / np.tan(ts + shift)
    m = float(np.min(vals))
    if m <= 0.0:
        raise CertificationError(
            f"slope-ratio margin non-positive (min {m!r}); contradicts Lemma 2.11",
            check="Lemma 2.11",
        )
    return SAFETY * m


def compute_mu0(consts, iota: float, points: int = 10_000) -> float:
    """Smoothing budget: safety-discounted minimum of the four admissibility
    bounds of Lemma 2.12."""
    r0 = _const(consts, "r0", LemmaId.L2_3)
    zeta = _const(consts, "zeta", LemmaId.L2_3)
    kappa = _const(consts, "kappa", LemmaId.L2_2)
    psi = _const(consts, "psi", LemmaId.L2_2)
    shift = r0**4 / zeta
    ts = np.linspace(r0**2 / kappa, r0, points)
    cot = 1.0 / np.tan(ts)
    cot_shifted = 1.0 / np.tan(ts + shift)
    cot_r0_sq = 1.0 / math.tan(r0) ** 2

    bound_iii = float(np.min((cot - cot_shifted) / (1.0 + cot)))
    if bound_iii <= 0.0:
        raise CertificationError(
            f"Lemma 2.12(iii) bound non-positive (min {bound_iii!r})",
            check="Lemma 2.12(iii)",
        )
    numer_iv = cot_shifted * (1.0 + cot_r0_sq) * np.tan(ts) - cot_r0_sq
    bound_iv = float(np.min(numer_iv / (math.tan(r0) * (1.0 + cot_r0_sq))))
    if bound_iv <= 0.0:
        raise CertificationError(
            f"Lemma 2.12(iv) bound non-positive (min {bound_iv!r})",
            check="Lemma 2.12(iv)",
        )
    return SAFETY * min(psi, iota / math.tan(r0), bound_iii, bound_iv)


def theta_boundary_values(R0: float, kappa: float, zeta: float, r0: float):
    """Value and slope the concave bridge must reach at t = r0^2/kappa.

    Both are negative for an admissible cascade.
    """
    b = r0**2 / kappa
    shift = r0**4 / zeta
    angle = 2.0 * b / r0
    theta_b = R0 * math.sin(b + shift) - (r0 / 2.0) * math.sin(angle)
    dtheta_b = R0 * math.cos(b + shift) - math.cos(angle)
    return theta_b, dtheta_b


def star_margin(R0: float, kappa: float, zeta: float, r0: float, psi: float) -> float:
    """Margin of the chord-slope inequality at the inner junction candidate:

        -theta'(b) > -theta(b) / (b - psi),   b = r0^2/kappa.

    Positive iff a concave bridge with the required boundary data exists.
    """
    b = r0**2 / kappa
    theta_b, dtheta_b = theta_boundary_values(R0, kappa, zeta, r0)
    return (-dtheta_b) - (-theta_b) / (b - psi)


@dataclass(frozen=True)
class ParamSet:
    """The validated constant cascade."""

    n: int
    p: int
    R0: float
    kappa: float
    zeta: float
    Lambda: float
    r0: float
    c: tuple[float, float, float, float, float]
    psi: float
    iota: float
    mu0: float
    mu: float

    @property
    def t_cut(self) -> float:
        """Junction between the bridge and the outer warping piece."""
        return self.r0**2 / self.kappa

    @property
    def shift(self) -> float:
        """Phase shift fed to the outer warping piece through the taper."""
        return self.r0**4 / self.zeta

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "R0": self.R0,
            "kappa": self.kappa,
            "zeta": self.zeta,
            "Lambda": self.Lambda,
            "r0": self.r0,
            "c1": self.c[0],
            "c2": self.c[1],
            "c3": self.c[2],
            "c4": self.c[3],
            "c5": self.c[4],
            "psi": self.psi,
            "iota": self.iota,
            "mu0": self.mu0,
            "mu": self.mu,
        }


OVERRIDE_NAMES = ("R0", "kappa", "zeta", "Lambda", "r0", "mu")


def _reject(message, clause):
    raise ConfigurationError(f"{message} ({clause})", clause=clause)


def select_params(n: int, p: int, overrides: Mapping[str, float] | None = None,
                  scan: GridSpec | None = None, points: int = 10_000) -> ParamSet:
    """Select and validate the full constant cascade for dimension ``n`` and
    ``p`` removed discs. ``overrides`` may pin R0, kappa, zeta, Lambda, r0
    or mu; a pinned value violating its clause is rejected by name."""
    if int(n) != n or n < 3:
        _reject(f"n = {n!r} must be an integer >= 3", "Proposition 1.12 (n >= 3)")
    if int(p) != p or p < 1:
        _reject(f"p = {p!r} must be an integer >= 1", "Proposition 1.12 (p >= 1)")
    n, p = int(n), int(p)
    ov = dict(overrides or {})
    unknown = sorted(set(ov) - set(OVERRIDE_NAMES))
    if unknown:
        raise ConfigurationError(
            f"unknown override(s) {unknown}; valid names: {list(OVERRIDE_NAMES)}",
            clause="overrides",
        )

    R0 = float(ov.get("R0", 0.1))
    if not 0.0 < R0 <= 0.1:
        _reject(f"R0 = {R0!r} outside (0, 1/10]", "Definition 2.1(a)")

    kappa_floor = 2.0 / math.sqrt(3.0 * R0)
    kappa = float(ov.get("kappa", 1.1 * kappa_floor))
    if not kappa > kappa_floor:
        _reject(f"kappa = {kappa!r} must exceed 2/sqrt(3*R0) = {kappa_floor!r}",
                "Definition 2.1(b)")

    zeta_hi = 3.0 * R0 * kappa**3 / 4.0
    zeta = float(ov.get("zeta", 0.5 * (kappa + zeta_hi)))
    if not (kappa < zeta < zeta_hi):
        _reject(f"zeta = {zeta!r} outside ({kappa!r}, {zeta_hi!r})",
                "Definition 2.1(c)")

    gamma = build_gamma(R0, ov.get("Lambda"))
    Lambda = gamma.Lambda

    consts = {"R0": R0, "kappa": kappa, "zeta": zeta}
    c = tuple(
        threshold_scan(lemma, consts, scan)
        for lemma in (LemmaId.L2_2, LemmaId.L2_3, LemmaId.L2_4, LemmaId.L2_5)
    ) + (
        min(threshold_scan(lemma, consts, scan)
            for lemma in (LemmaId.L2_6i, LemmaId.L2_6ii, LemmaId.L2_6iii)),
    )

    r0_cap = min(R0, math.pi / (2.0 * (1.0 + Lambda)), *c)
    r0_default = SAFETY * min(r0_cap, math.pi / p)
    r0 = float(ov.get("r0", r0_default))
    if not 0.0 < r0 < r0_cap:
        _reject(
            f"r0 = {r0!r} must lie in (0, {r0_cap!r}) = "
            "(0, min(R0, pi/(2(1+Lambda)), c1..c5))",
            "Definition 2.8",
        )
    if not r0 < math.pi / p:
        _reject(f"r0 = {r0!r} must be < pi/p = {math.pi / p!r} so the {p} "
                "removed balls stay disjoint", "disjointness r0 < pi/p")

    b = r0**2 / kappa
    margin0 = star_margin(R0, kappa, zeta, r0, 0.0)
    if margin0 <= 0.0:
        raise CertificationError(
            f"chord-slope inequality fails even as psi -> 0 (margin {margin0!r})",
            check="Lemma 2.6(iii) at x = r0",
        )
    psi = None
    for k in range(1, PSI_MAX_HALVINGS + 1):
        candidate = b * 2.0**-k
        m = star_margin(R0, kappa, zeta, r0, candidate)
        if m > 0.0 and m >= PSI_RELATIVE_MARGIN * margin0:
            psi = candidate
            break
    if psi is None:
        raise CertificationError(
            f"no dyadic fraction of r0^2/kappa satisfies the chord-slope "
            f"inequality with relative margin {PSI_RELATIVE_MARGIN}",
            check="Lemma 2.9 (psi selection)",
        )

    iota = compute_iota({"r0": r0, "zeta": zeta, "kappa": kappa}, points=points)
    mu0 = compute_mu0(
        {"r0": r0, "zeta": zeta, "kappa": kappa, "psi": psi}, iota, points=points
    )
    mu = float(ov.get("mu", mu0 / 2.0))
    if not 0.0 < mu < mu0:
        _reject(f"mu = {mu!r} outside (0, mu0) with mu0 = {mu0!r}; "
                "mu < mu0 is what keeps mu*tan(r0) below iota",
                "Lemma 2.13 (mu in (0, mu0))")

    return ParamSet(n=n, p=p, R0=R0, kappa=kappa, zeta=zeta, Lambda=Lambda,
                    r0=r0, c=c, psi=psi, iota=iota, mu0=mu0, mu=mu)
