"""Smooth cut-off machinery: a C-infinity unit step, window bumps, and the
slow decay function used to taper the outer warping piece."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError


def _as_array(x):
    a = np.asarray(x, dtype=float)
    return a, a.ndim == 0


def _wrap(a, scalar):
    return float(a) if scalar else a


# ---------------------------------------------------------------------------
# C-infinity unit step S: S(u) = 1 for u <= 0, S(u) = 0 for u >= 1, monotone.
# Built from h(u) = exp(-1/u); all derivatives vanish at both ends.
# ---------------------------------------------------------------------------

def _exp_pair(u):
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        e1 = np.exp(-1.0 / u)
        e2 = np.exp(-1.0 / (1.0 - u))
    return e1, e2


def step_value(u):
    u, scalar = _as_array(u)
    out = np.where(u <= 0.0, 1.0, 0.0)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        e1, e2 = _exp_pair(u[m])
        out[m] = e2 / (e1 + e2)
    return _wrap(out, scalar)


def step_d1(u):
    u, scalar = _as_array(u)
    out = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        uu = u[m]
        e1, e2 = _exp_pair(uu)
        p = e1 / uu**2
        q = -e2 / (1.0 - uu) ** 2
        den = e1 + e2
        out[m] = (q * e1 - e2 * p) / den**2
    return _wrap(out, scalar)


def step_d2(u):
    u, scalar = _as_array(u)
    out = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        uu = u[m]
        e1, e2 = _exp_pair(uu)
        p = e1 / uu**2
        q = -e2 / (1.0 - uu) ** 2
        pp = e1 * (1.0 / uu**4 - 2.0 / uu**3)
        qq = e2 * (1.0 / (1.0 - uu) ** 4 - 2.0 / (1.0 - uu) ** 3)
        den = e1 + e2
        dden = p + q
        num = q * e1 - e2 * p
        dnum = qq * e1 - e2 * pp
        out[m] = dnum / den**2 - 2.0 * num * dden / den**3
    return _wrap(out, scalar)


@lru_cache(maxsize=None)
def step_derivative_sups(points: int = 100_001) -> tuple[float, float]:
    """Grid suprema of |S'| and |S''| on [0, 1]."""
    g = np.linspace(0.0, 1.0, points)
    return float(np.max(np.abs(step_d1(g)))), float(np.max(np.abs(step_d2(g))))


# ---------------------------------------------------------------------------
# C-infinity bump on (0, 1), normalised to peak value 1 at u = 1/2.
# Used both as the blending weight of the smoothing windows and (rescaled)
# as the mollifier kernel.
# ---------------------------------------------------------------------------

def bump01_value(u):
    u, scalar = _as_array(u)
    out = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        uu = u[m]
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            out[m] = np.exp(1.0 - 0.25 / (uu * (1.0 - uu)))
    return _wrap(out, scalar)


def bump01_d1(u):
    u, scalar = _as_array(u)
    out = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        uu = u[m]
        w = uu * (1.0 - uu)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            out[m] = np.exp(1.0 - 0.25 / w) * 0.25 * (1.0 - 2.0 * uu) / w**2
    return _wrap(out, scalar)


# ---------------------------------------------------------------------------
# Tapering function: value 1 for x <= 0, 0 for x >= Lambda, with first and
# second derivative suprema strictly below the squashing factor.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpFunction:
    """Monotone C-infinity taper gamma with gamma(x)=1 for x<=0 and
    gamma(x)=0 for x>=Lambda."""

    Lambda: float

    def value(self, x):
        x, scalar = _as_array(x)
        return _wrap(step_value(x / self.Lambda), scalar)

    def d1(self, x):
        x, scalar = _as_array(x)
        return _wrap(step_d1(x / self.Lambda) / self.Lambda, scalar)

    def d2(self, x):
        x, scalar = _as_array(x)
        return _wrap(step_d2(x / self.Lambda) / self.Lambda**2, scalar)

    def derivative_sups(self, points: int = 100_001, pad: float = 1.0):
        """Grid suprema of |gamma'| and |gamma''| over [-pad, Lambda + pad],
        with the locations where they are attained."""
        g = np.linspace(-pad, self.Lambda + pad, points)
        d1 = np.abs(self.d1(g))
        d2 = np.abs(self.d2(g))
        i1, i2 = int(np.argmax(d1)), int(np.argmax(d2))
        return (float(d1[i1]), float(g[i1])), (float(d2[i2]), float(g[i2]))


def build_gamma(R0: float, Lambda: float | None = None) -> BumpFunction:
    """Construct the taper for a given squashing factor.

    The support length defaults to the smallest value (with 10% headroom)
    that keeps both derivative suprema below R0; an explicit ``Lambda`` is
    validated against the same bounds.
    """
    if not 0.0 < R0 <= 0.1:
        raise ConfigurationError(
            f"R0 = {R0!r} outside (0, 1/10] (Definition 2.1(a))",
            clause="Definition 2.1(a)",
        )
    s1, s2 = step_derivative_sups()
    if Lambda is None:
        Lambda = max(1.0 / R0 + 1.0, 1.1 * s1 / R0, 1.1 * math.sqrt(s2 / R0))
    if not Lambda > 1.0 / R0:
        raise ConfigurationError(
            f"Lambda = {Lambda!r} must exceed 1/R0 = {1.0 / R0!r} (Definition 2.7)",
            clause="Definition 2.7",
        )
    gamma = BumpFunction(float(Lambda))
    (g1, _), (g2, _) = gamma.derivative_sups()
    if not (g1 < R0 and g2 < R0):
        raise ConfigurationError(
            f"taper derivative bounds violated: sup|gamma'| = {g1!r}, "
            f"sup|gamma''| = {g2!r}, limit R0 = {R0!r} (Definition 2.7)",
            clause="Definition 2.7",
        )
    return gamma
