"""Comparison-geometry quantities: distance bound, model volumes, volume ratios.

The model space is the simply connected space form of curvature -alpha^2;
``model_ball_volume`` uses the warped-profile quadrature

    Vol(B_r) = n c(n) * int_0^r (sinh(alpha t) / alpha)^(n-1) dt,

where c(n) is the Lebesgue volume of the unit ball in R^n (the reading under
which the alpha -> 0 limit reproduces the flat value c(n) r^n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "ModelSpace",
    "unit_ball_volume",
    "unit_sphere_area",
    "hawking_bound",
    "model_ball_volume",
    "sphere_ball_volume",
    "bg_ratio",
    "BGRatioResult",
    "isoperimetric_ratio",
]


def unit_ball_volume(n):
    """Lebesgue volume of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def unit_sphere_area(n):
    """Surface area of the unit sphere S^(n-1) in R^n (= n * c(n))."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class ModelSpace:
    """Space form of curvature -alpha^2 (alpha = 0 is flat)."""

    n: int
    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("curvature parameter alpha must be nonnegative")


def hawking_bound(alpha, c0):
    """Maximal distance to a mean-convex boundary under Ric >= -(n-1) alpha^2.

    Requires the boundary mean curvature H > (n-1) c0 > (n-1) alpha; returns
    1/c0 when alpha = 0 and arccoth(c0/alpha)/alpha otherwise.  The two
    branches join continuously as alpha -> 0.
    """
    if c0 <= alpha or alpha < 0:
        raise DomainError("hawking bound needs c0 > alpha >= 0")
    if alpha == 0.0:
        return 1.0 / c0
    return math.atanh(alpha / c0) / alpha


def model_ball_volume(model, r):
    """Geodesic-ball volume in the curvature -alpha^2 model space."""
    if r <= 0:
        raise DomainError("radius must be positive")
    n, alpha = model.n, model.alpha
    cn = unit_ball_volume(n)
    if alpha == 0.0:
        return cn * r ** n
    val, _ = integrate.quad(lambda t: (math.sinh(alpha * t) / alpha) ** (n - 1),
                            0.0, r, epsabs=1e-13, epsrel=1e-12)
    return n * cn * val


def sphere_ball_volume(n, r):
    """Geodesic-ball volume on the unit round sphere S^n (0 < r <= pi)."""
    if not 0 < r <= math.pi:
        raise DomainError("sphere geodesic radius must lie in (0, pi]")
    val, _ = integrate.quad(lambda t: math.sin(t) ** (n - 1), 0.0, r,
                            epsabs=1e-13, epsrel=1e-12)
    # Vol(B_r) = |S^(n-1)| * int_0^r sin^(n-1) t dt on the unit round S^n
    return unit_sphere_area(n) * val


@dataclass
class BGRatioResult:
    radii: np.ndarray
    volumes: np.ndarray
    model_volumes: np.ndarray
    ratios: np.ndarray
    nonincreasing: bool
    max_increase: float


def bg_ratio(volumes, model, radii, tol=1e-8):
    """Ratio r -> Vol(B_r) / Vol_model(B_r) and its monotonicity verdict.

    ``volumes`` is a callable or an array aligned with ``radii``; successive
    ratio increases up to ``tol`` (relative) are treated as round-off.
    """
    radii = np.asarray(radii, dtype=np.float64)
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and increasing")
    if callable(volumes):
        vol = np.array([float(volumes(r)) for r in radii])
    else:
        vol = np.asarray(volumes, dtype=np.float64)
    if np.any(vol <= 0) or np.any(np.diff(vol) < 0):
        raise ValueError("volumes must be positive and nondecreasing")
    mvol = np.array([model_ball_volume(model, r) for r in radii])
    ratios = vol / mvol
    increases = np.diff(ratios) / np.abs(ratios[:-1])
    max_inc = float(increases.max()) if len(increases) else 0.0
    return BGRatioResult(radii=radii, volumes=vol, model_volumes=mvol,
                         ratios=ratios, nonincreasing=bool(max_inc <= tol),
                         max_increase=max_inc)


def isoperimetric_ratio(n, area, volume):
    """Diagnostic area^(n/(n-1)) / volume; no sharp constant is asserted.

    Equals n^(n/(n-1)) c(n)^(1/(n-1)) for the Euclidean ball and is invariant
    under the scaling (area, volume) -> (t^(n-1) area, t^n volume).
    """
    if area <= 0 or volume <= 0:
        raise DomainError("area and volume must be positive")
    return area ** (n / (n - 1.0)) / volume
