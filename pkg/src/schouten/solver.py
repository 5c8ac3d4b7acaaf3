"""Radial Newton continuation on the round sphere.

Rotationally symmetric conformal factors u(theta) on the unit sphere reduce
the fully nonlinear curvature operator to two eigenvalue branches per node:
with the warped-product Hessian (radial part u'', tangential part
cot(theta) u') and background Schouten eigenvalues 1/2,

    lam_rad = [-2/(n-2) u''/u + 2(n-1)/(n-2)^2 (u'/u)^2 + 1/2] * u^(-4/(n-2)),
    lam_tan = [-2/(n-2) cot(theta) u'/u - 2/(n-2)^2 (u'/u)^2 + 1/2] * u^(-4/(n-2)),

the tangential branch carrying multiplicity n-1.  At the poles cot(theta) u'
is replaced by u'' (the removable-singularity limit for even profiles).

The solver walks the two-parameter residual family

    residual(u; s, t) = f_t(lambda(A_{g_u})) - psi * u^(-s)

with damped Newton steps, finite-difference Jacobians and step halving
whenever the eigenvalues leave the cone; it also hosts the semilinear
family H_t used by the degree checkpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import linalg as sla

from . import _kernels
from .comparison import unit_sphere_area
from .errors import ConeExitError, ContinuationError, DomainError

__all__ = [
    "RadialProfile",
    "ContinuationState",
    "radial_schouten_eigs",
    "schouten_eig_matrix",
    "residual_Fs",
    "newton_solve",
    "newton_continuation",
    "linearized_H0_spectrum",
    "ht_residual",
    "g0_residual",
    "g0_constant_solution",
    "ht_continuation",
    "HtState",
    "apriori_margins",
    "MarginReport",
]


# ---------------------------------------------------------------------------
# discretisation
# ---------------------------------------------------------------------------

def _cheb_matrix(m):
    # Chebyshev-Lobatto differentiation matrix on x_j = cos(j pi / m)
    if m == 0:
        return np.zeros((1, 1)), np.ones(1)
    x = np.cos(np.pi * np.arange(m + 1) / m)
    c = np.hstack([2.0, np.ones(m - 1), 2.0]) * (-1.0) ** np.arange(m + 1)
    xm = np.tile(x, (m + 1, 1)).T
    dx = xm - xm.T + np.eye(m + 1)
    d = np.outer(c, 1.0 / c) / dx
    d -= np.diag(d.sum(axis=1))
    return d, x


@dataclass(frozen=True)
class RadialProfile:
    """Positive radial profile u(theta_j) on [0, pi] with pole-aware calculus.

    Both endpoints are grid nodes; the discretisation enforces the Neumann
    compatibility u'(0) = u'(pi) = 0 (even reflection on the uniform grid,
    zeroed pole rows of the spectral derivative on the Lobatto grid).
    """

    n: int
    theta: np.ndarray
    values: np.ndarray
    grid: str = "uniform"

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)
        if np.any(values <= 0):
            raise DomainError("radial profile must be strictly positive")
        if self.grid not in ("uniform", "lobatto"):
            raise ValueError("grid must be 'uniform' or 'lobatto'")

    @classmethod
    def make(cls, n, num_nodes, values=None, grid="uniform"):
        m = num_nodes - 1
        if grid == "uniform":
            theta = np.linspace(0.0, math.pi, num_nodes)
        else:
            _, x = _cheb_matrix(m)
            theta = (math.pi / 2.0) * (1.0 - x)
        if values is None:
            values = np.ones(num_nodes)
        elif callable(values):
            values = values(theta)
        return cls(n=n, theta=theta, values=np.asarray(values, dtype=np.float64),
                   grid=grid)

    @property
    def num_nodes(self):
        return len(self.theta)

    def with_values(self, values):
        return replace(self, values=np.asarray(values, dtype=np.float64))

    # -- derivative operators -------------------------------------------------

    def d1_matrix(self):
        m = self.num_nodes
        if self.grid == "uniform":
            h = self.theta[1] - self.theta[0]
            d = np.zeros((m, m))
            for j in range(1, m - 1):
                d[j, j - 1] = -0.5 / h
                d[j, j + 1] = 0.5 / h
            return d
        dc, _ = _cheb_matrix(m - 1)
        d = -(2.0 / math.pi) * dc
        d[0, :] = 0.0
        d[-1, :] = 0.0
        return d

    def d2_matrix(self):
        m = self.num_nodes
        if self.grid == "uniform":
            h = self.theta[1] - self.theta[0]
            d = np.zeros((m, m))
            for j in range(1, m - 1):
                d[j, j - 1] = 1.0 / h ** 2
                d[j, j] = -2.0 / h ** 2
                d[j, j + 1] = 1.0 / h ** 2
            d[0, 0], d[0, 1] = -2.0 / h ** 2, 2.0 / h ** 2
            d[-1, -1], d[-1, -2] = -2.0 / h ** 2, 2.0 / h ** 2
            return d
        dc, _ = _cheb_matrix(m - 1)
        d1 = -(2.0 / math.pi) * dc
        return d1 @ d1

    def d1(self, values=None):
        v = self.values if values is None else values
        if self.grid == "uniform":
            h = self.theta[1] - self.theta[0]
            out = np.empty_like(v)
            out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
            out[0] = 0.0
            out[-1] = 0.0
            return out
        return self.d1_matrix() @ v

    def d2(self, values=None):
        v = self.values if values is None else values
        if self.grid == "uniform":
            h = self.theta[1] - self.theta[0]
            out = np.empty_like(v)
            out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2
            out[0] = 2.0 * (v[1] - v[0]) / h ** 2
            out[-1] = 2.0 * (v[-2] - v[-1]) / h ** 2
            return out
        return self.d2_matrix() @ v

    def pole_mask(self):
        mask = np.zeros(self.num_nodes, dtype=bool)
        mask[0] = mask[-1] = True
        return mask

    def cot_theta(self):
        out = np.zeros(self.num_nodes)
        out[1:-1] = 1.0 / np.tan(self.theta[1:-1])
        return out

    # -- quadrature over the sphere -------------------------------------------

    def quad_weights(self):
        """Weights for integration over S^n against the round measure."""
        th = self.theta
        w = np.empty_like(th)
        w[0] = 0.5 * (th[1] - th[0])
        w[-1] = 0.5 * (th[-1] - th[-2])
        w[1:-1] = 0.5 * (th[2:] - th[:-2])
        return unit_sphere_area(self.n) * np.sin(th) ** (self.n - 1.0) * w

    def integrate(self, values):
        return float(self.quad_weights() @ np.asarray(values))

    def volume(self):
        return self.integrate(np.ones(self.num_nodes))

    def laplacian(self, values=None):
        """Laplace-Beltrami of the radial function: u'' + (n-1) cot(theta) u'."""
        v = self.values if values is None else values
        up = self.d1(v)
        upp = self.d2(v)
        out = upp + (self.n - 1.0) * self.cot_theta() * up
        out[0] = self.n * upp[0]
        out[-1] = self.n * upp[-1]
        return out


# ---------------------------------------------------------------------------
# Schouten eigenvalues and the fully nonlinear residual
# ---------------------------------------------------------------------------

def _eig_pair(profile, values=None):
    v = profile.values if values is None else values
    if np.any(v <= 0):
        raise DomainError("conformal factor must stay positive")
    up = profile.d1(v)
    upp = profile.d2(v)
    return _kernels.radial_sphere_eigs(v, up, upp, profile.cot_theta(),
                                       profile.pole_mask(), profile.n)


def schouten_eig_matrix(profile, values=None):
    """(num_nodes, n) eigenvalue rows [radial, tangential x (n-1)], unsorted."""
    rad, tan = _eig_pair(profile, values)
    out = np.empty((profile.num_nodes, profile.n))
    out[:, 0] = rad
    out[:, 1:] = tan[:, None]
    return out


def radial_schouten_eigs(profile, j):
    """Ascending eigenvalues of A_{g_u} relative to g_u at node j."""
    lam = schouten_eig_matrix(profile)[j]
    return np.sort(lam)


def _psi_values(psi, profile):
    if callable(psi):
        return np.asarray(psi(profile.theta), dtype=np.float64)
    return np.broadcast_to(np.asarray(psi, dtype=np.float64),
                           (profile.num_nodes,)).astype(np.float64)


def residual_Fs(profile, f, s, psi=1.0, values=None):
    """Nodewise f_t(lambda(A_{g_u})) - psi * u^(-s); raises on cone exit."""
    v = profile.values if values is None else values
    lam = schouten_eig_matrix(profile, v)
    inside = f.cone.contains_batch(lam)
    if not inside.all():
        node = int(np.argmin(inside))
        raise ConeExitError(f"eigenvalues left the cone at node {node}", node=node)
    vals = f.value_batch(lam)
    return vals - _psi_values(psi, profile) * v ** (-s)


# ---------------------------------------------------------------------------
# continuation states
# ---------------------------------------------------------------------------

@dataclass
class ContinuationState:
    s: float
    t: float
    alpha: float
    profile: RadialProfile
    residual_norm: float
    min_cone_margin: float
    min_u: float
    max_u: float
    max_abs_log_u: float
    c1_log: float
    c2_log: float
    ricci_margin: float
    newton_iterations: int = 0


def _ricci_margin_from_eigs(lam, n, alpha=0.0):
    # eigenvalues of Ric_{g_u} + (n-1) alpha^2 g_u relative to g_u
    s1 = lam.sum(axis=1)
    rel = (n - 2.0) * lam + s1[:, None] + (n - 1.0) * alpha ** 2
    return float(rel.min())


def make_state(profile, f, s, t, psi=1.0, alpha=0.0, iterations=0):
    ft = f.deform(t) if t != 1.0 else f
    res = residual_Fs(profile, ft, s, psi)
    lam = schouten_eig_matrix(profile)
    margin = float(ft.cone.margin_batch(lam).min())
    logu = np.log(profile.values)
    state = ContinuationState(
        s=s, t=t, alpha=alpha, profile=profile,
        residual_norm=float(np.abs(res).max()),
        min_cone_margin=margin,
        min_u=float(profile.values.min()),
        max_u=float(profile.values.max()),
        max_abs_log_u=float(np.abs(logu).max()),
        c1_log=float(np.abs(profile.d1(logu)).max()),
        c2_log=float(np.abs(profile.d2(logu)).max()),
        ricci_margin=_ricci_margin_from_eigs(lam, profile.n, 0.0),
        newton_iterations=iterations,
    )
    return state


def _fd_jacobian(res_fn, u, r0):
    """Central-difference Jacobian with step 1e-8 (1 + |u_j|).

    The residual depends on u through 1/h^2-scale stencils, so its second
    derivative in a single node value is of order h^-4; a forward difference
    with an O(1e-7) step buries the soft (near-constant) modes of the
    Jacobian under truncation error and wrecks the Newton direction.
    Central differencing at a smaller step keeps every mode accurate.
    Falls back to one-sided probes when a side leaves the admissible set.
    """
    m = len(u)
    jac = np.empty((m, m))
    for j in range(m):
        base = 1e-8 * (1.0 + abs(u[j]))
        for shrink in range(6):
            step = base / 8.0 ** shrink
            up = u.copy()
            um = u.copy()
            up[j] += step
            um[j] -= step
            try:
                rp = res_fn(up)
            except (DomainError, ConeExitError):
                rp = None
            try:
                rm = res_fn(um)
            except (DomainError, ConeExitError):
                rm = None
            if rp is not None and rm is not None:
                jac[:, j] = (rp - rm) / (2.0 * step)
                break
            if rp is not None:
                jac[:, j] = (rp - r0) / step
                break
            if rm is not None:
                jac[:, j] = (r0 - rm) / step
                break
        else:
            raise ContinuationError(
                f"cannot difference the residual at node {j}: cone boundary")
    return jac


def _damped_newton(res_fn, u0, tol, max_iter, guard=None):
    """Affine-covariant damped Newton (natural monotonicity line search).

    Steps are accepted when the simplified Newton correction contracts,
    ||J^-1 R(u + a*step)|| <= (1 - a/2) ||J^-1 R(u)||, a test that is
    invariant under the ill-conditioning of the stencil operator; trial
    points violating positivity, the guard, or the cone are skipped by
    halving a.  Convergence is declared in the discrete max norm.
    Returns (u, iterations, residual_norm).
    """
    u = np.asarray(u0, dtype=np.float64).copy()
    r = res_fn(u)
    rn = float(np.abs(r).max())
    for it in range(max_iter):
        if rn <= tol:
            return u, it, rn
        jac = _fd_jacobian(res_fn, u, r)
        try:
            lu = sla.lu_factor(jac)
        except ValueError as exc:
            raise ContinuationError("non-finite Jacobian in Newton step") from exc
        delta = sla.lu_solve(lu, -r)
        norm_delta = float(np.linalg.norm(delta))
        if not math.isfinite(norm_delta):
            raise ContinuationError("singular Jacobian in Newton step")
        alpha = 1.0
        accepted = False
        while alpha > 1e-14:
            trial = u + alpha * delta
            if np.all(trial > 0) and (guard is None or guard(trial)):
                try:
                    rt = res_fn(trial)
                except (DomainError, ConeExitError):
                    rt = None
                if rt is not None:
                    dbar = sla.lu_solve(lu, -rt)
                    nbar = float(np.linalg.norm(dbar))
                    if nbar <= (1.0 - 0.5 * alpha) * norm_delta or nbar < 1e-13:
                        u, r = trial, rt
                        rn = float(np.abs(r).max())
                        accepted = True
                        break
            alpha *= 0.5
        if not accepted:
            raise ContinuationError(f"Newton damping stalled at residual {rn:g}")
    if rn <= tol:
        return u, max_iter, rn
    raise ContinuationError(f"Newton did not reach tolerance, residual {rn:g}")


def _rhs_homotopy_solve(profile, ft, s, psi, tol, max_iter):
    """Sweep the right-hand side from the start profile's own curvature values.

    A start hugging the cone boundary (where sigma_k^(1/k) has a root-type
    wall) defeats direct Newton; blending the right-hand side

        rhs_tau = tau * psi u^-s + (1 - tau) * f(lambda(A_{g_u0}))

    makes the start an exact solution at tau = 0 and walks it into the
    interior, warm-starting Newton at each leg.
    """
    lam0 = schouten_eig_matrix(profile)
    f0 = np.maximum(ft.power_value_batch(lam0), 0.0) ** (1.0 / ft.cone.k)
    psi_arr = _psi_values(psi, profile)
    u = profile.values.copy()
    tau, dtau = 0.0, 0.125
    total = 0
    while tau < 1.0:
        target = min(1.0, tau + dtau)

        def res_fn(v, target=target):
            lam = schouten_eig_matrix(profile, v)
            inside = ft.cone.contains_batch(lam)
            if not inside.all():
                node = int(np.argmin(inside))
                raise ConeExitError(f"cone exit at node {node}", node=node)
            return (ft.value_batch(lam)
                    - (target * psi_arr * v ** (-s) + (1.0 - target) * f0))

        leg_tol = tol if target >= 1.0 else max(tol, 1e-8)
        try:
            u_new, iters, _ = _damped_newton(res_fn, u, leg_tol, max_iter)
        except ContinuationError:
            dtau *= 0.5
            if dtau < 1e-4:
                raise
            continue
        u, tau, total = u_new, target, total + iters
        dtau = min(0.25, 2.0 * dtau)
    return u, total


def newton_solve(profile, f, s, t=1.0, psi=1.0, tol=1e-10, max_iter=60):
    """Damped Newton solve of residual(u; s, t) = 0 from the given profile.

    Tries the affine-covariant Newton iteration on the residual directly;
    if that stalls (typically a start pinned against the cone boundary) it
    falls back to the right-hand-side sweep.  The returned state is
    certified at ``tol`` in the max norm.
    """
    ft = f.deform(t) if t != 1.0 else f

    def res_fn(u):
        return residual_Fs(profile, ft, s, psi, values=u)

    if float(np.abs(res_fn(profile.values)).max()) <= tol:
        return make_state(profile.with_values(profile.values.copy()), f, s, t,
                          psi, iterations=0)
    try:
        u, iters, _ = _damped_newton(res_fn, profile.values, tol, max_iter)
    except ContinuationError:
        u, iters = _rhs_homotopy_solve(profile, ft, s, psi, tol, max_iter)
    return make_state(profile.with_values(u), f, s, t, psi, iterations=iters)


def newton_continuation(start, schedule, f, psi=1.0, tol=1e-10, max_steps=400,
                        min_step=1e-6):
    """Walk the (s, t) schedule from an already-converged start state.

    Each accepted state satisfies residual <= tol, u > 0 and a strictly
    positive cone margin; failed legs are bisected in parameter space, and
    the walk aborts with the last good state once the leg length underflows.
    """
    if start.residual_norm > tol:
        raise ValueError("continuation start state does not satisfy the tolerance")
    states = [start]
    cur = start
    pending = list(schedule)
    attempts = 0
    while pending:
        target_s, target_t = pending[0]
        attempts += 1
        if attempts > max_steps:
            raise ContinuationError("continuation exceeded the step budget",
                                    last_state=cur)
        try:
            state = newton_solve(cur.profile, f, target_s, target_t, psi, tol)
            if state.min_cone_margin <= 0:
                raise ContinuationError("cone margin lost at accepted state")
        except (ContinuationError, ConeExitError, DomainError):
            gap = max(abs(target_s - cur.s), abs(target_t - cur.t))
            if gap < min_step:
                raise ContinuationError("continuation step underflow",
                                        last_state=cur)
            pending.insert(0, (0.5 * (cur.s + target_s), 0.5 * (cur.t + target_t)))
            continue
        states.append(state)
        cur = state
        pending.pop(0)
    return states


# ---------------------------------------------------------------------------
# semilinear family H_t and its checkpoints
# ---------------------------------------------------------------------------

def _cn(n):
    return (n - 2.0) / (4.0 * (n - 1.0))


def ht_residual(profile, t, values=None):
    """H_t[u] = -Lap u + [(1-t) + t c(n) R] u - [(1-t) mean(u^2) + t] u^(p_t).

    On the unit round sphere R = n(n-1), p = n/(n-2), p_t = (1-t) + t p and
    mean(u^2) is the volume-normalised integral of u^2.
    """
    n = profile.n
    v = profile.values if values is None else values
    p = n / (n - 2.0)
    pt = (1.0 - t) + t * p
    scal = n * (n - 1.0)
    lap = profile.laplacian(v)
    mean_u2 = profile.integrate(v ** 2) / profile.volume()
    coef = (1.0 - t) + t * _cn(n) * scal
    source = (1.0 - t) * mean_u2 + t
    return -lap + coef * v - source * v ** pt


def g0_residual(profile, values=None):
    """-Lap u + c(n) R u - u^(n/(n-2)), the t = 1 member written directly."""
    n = profile.n
    v = profile.values if values is None else values
    lap = profile.laplacian(v)
    return -lap + _cn(n) * n * (n - 1.0) * v - v ** (n / (n - 2.0))


def g0_constant_solution(n):
    """The constant positive root of c(n) R u = u^(n/(n-2)) on the unit sphere."""
    return (n * (n - 2.0) / 4.0) ** ((n - 2.0) / 2.0)


@dataclass
class HtState:
    t: float
    profile: RadialProfile
    residual_norm: float
    band_lo: Optional[float]
    band_hi: Optional[float]
    newton_iterations: int = 0


def _ht_band(profile, t):
    # the normalised quantity s^(1/(p_t - 1)) * u; meaningful for t > 0
    n = profile.n
    p = n / (n - 2.0)
    pt = (1.0 - t) + t * p
    if pt - 1.0 < 1e-8:
        return None, None
    s = (1.0 - t) * profile.integrate(profile.values ** 2) / profile.volume() + t
    factor = math.exp(math.log(s) / (pt - 1.0))
    vals = factor * profile.values
    return float(vals.min()), float(vals.max())


def ht_continuation(profile, t_schedule, tol=1e-10, max_iter=40):
    """Newton walk of the semilinear family along the t schedule."""
    states = []
    cur = profile
    for t in t_schedule:
        def res_fn(u, t=t):
            return ht_residual(cur, t, values=u)

        u, iters, rn = _damped_newton(res_fn, cur.values, tol, max_iter)
        cur = cur.with_values(u)
        lo, hi = _ht_band(cur, t)
        states.append(HtState(t=t, profile=cur, residual_norm=rn,
                              band_lo=lo, band_hi=hi, newton_iterations=iters))
    return states


def linearized_H0_spectrum(profile, m, return_vectors=False):
    """Lowest m eigenvalues of phi -> -Lap phi - (2/Vol) Int phi on radial fields.

    The unique nonpositive eigenvalue is -2 with constant eigenfunction; the
    rest of the spectrum is the radial Laplacian spectrum on mean-zero fields.
    """
    n = profile.n
    nn = profile.num_nodes
    d1 = profile.d1_matrix()
    d2 = profile.d2_matrix()
    coef = (n - 1.0) * profile.cot_theta()
    lap = d2 + coef[:, None] * d1
    lap[0, :] = n * d2[0, :]
    lap[-1, :] = n * d2[-1, :]
    w = profile.quad_weights()
    a = -lap - (2.0 / profile.volume()) * np.tile(w, (nn, 1))
    vals, vecs = sla.eig(a)
    order = np.argsort(vals.real)
    vals = vals.real[order][:m]
    if return_vectors:
        return vals, vecs.real[:, order][:, :m]
    return vals


# ---------------------------------------------------------------------------
# margin instrumentation
# ---------------------------------------------------------------------------

@dataclass
class MarginReport:
    max_abs_log_u: float
    c1_log: float
    c2_log: float
    min_cone_margin: float
    min_ricci_margin: float
    floor: float
    warnings: list


def apriori_margins(state, floor=1e-8):
    """Margin record of an accepted state; collapses below the floor raise flags."""
    warnings = []
    if state.min_cone_margin < floor:
        warnings.append(
            f"cone margin {state.min_cone_margin:.3e} below floor {floor:.1e}"
            " (blow-up warning)")
    if state.ricci_margin < -floor:
        warnings.append(f"Ricci margin {state.ricci_margin:.3e} negative")
    if state.min_u <= floor:
        warnings.append(f"min u {state.min_u:.3e} collapsing")
    return MarginReport(
        max_abs_log_u=state.max_abs_log_u,
        c1_log=state.c1_log,
        c2_log=state.c2_log,
        min_cone_margin=state.min_cone_margin,
        min_ricci_margin=state.ricci_margin,
        floor=floor,
        warnings=warnings,
    )
