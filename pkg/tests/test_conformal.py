import numpy as np
import pytest
from scipy.linalg import sqrtm

from schouten import conformal as cf
from schouten.errors import DomainError


def exp_linear_factor(n, c):
    """u(x) = exp(c x_1) with closed-form derivatives."""
    def val(x):
        return np.exp(c * x[:, 0])

    def grad(x):
        g = np.zeros_like(x)
        g[:, 0] = c * np.exp(c * x[:, 0])
        return g

    def hess(x):
        h = np.zeros((x.shape[0], n, n))
        h[:, 0, 0] = c ** 2 * np.exp(c * x[:, 0])
        return h

    return cf.ConformalFactor.from_callable(n, val, grad=grad, hess=hess)


def test_flat_schouten_vanishes():
    g = cf.MetricField.flat(5)
    pts = np.array([[0.1, -0.4, 2.0, 0.0, 1.0], [0.0] * 5])
    assert np.abs(cf.schouten_background(g, pts)).max() == 0.0


@pytest.mark.parametrize("chart", ["normal", "polar"])
def test_round_sphere_schouten_is_half_metric(chart, rng):
    n = 4
    if chart == "normal":
        g = cf.MetricField.sphere_normal(n)
        pts = rng.uniform(-0.8, 0.8, (6, n))
    else:
        g = cf.MetricField.sphere_polar(n)
        pts = rng.uniform(0.6, 2.4, (6, n))
    a = cf.schouten_background(g, pts)
    gm = g.components(pts)
    assert np.abs(a - gm / 2).max() < 1e-12


def test_scalar_curvature_and_trace_identity(rng):
    for n in (3, 5):
        g = cf.MetricField.sphere_normal(n)
        x = rng.uniform(-0.5, 0.5, n)
        scal = cf.scalar_curvature(g, x)
        assert scal == pytest.approx(n * (n - 1), rel=1e-10)
        a = cf.schouten_background(g, x)
        ginv = np.linalg.inv(g.components(x))
        tr = float(np.einsum("ij,ij->", ginv, a))
        assert tr == pytest.approx(scal / (2 * (n - 1)), rel=1e-8)


def test_fd_matches_analytic_and_second_order(rng):
    g = cf.MetricField.sphere_normal(4)
    x = np.array([0.3, -0.2, 0.5, 0.1])
    a_exact = cf.schouten_background(g, x)
    errs = []
    for h in (2e-3, 1e-3, 5e-4):
        a_fd = cf.schouten_background(g.with_fd(h=h), x)
        errs.append(np.abs(a_fd - a_exact).max())
    # halving h shrinks the error by roughly four
    assert 2.5 < errs[0] / errs[1] < 6.0
    assert 2.5 < errs[1] / errs[2] < 6.0


def test_fd_agreement_on_product_metric(rng):
    # warped-product (polar) chart: finite differences track the closed-form
    # derivatives of the diagonal metric
    g = cf.MetricField.sphere_polar(4)
    x = rng.uniform(0.7, 2.3, (3, 4))
    a_exact = cf.schouten_background(g, x)
    a_fd = cf.schouten_background(g.with_fd(h=1e-4), x)
    assert np.abs(a_fd - a_exact).max() < 1e-6


def test_richardson_refinement_beats_plain_fd():
    g = cf.MetricField.sphere_normal(4)
    x = np.array([0.3, -0.2, 0.5, 0.1])
    a_exact = cf.schouten_background(g, x)
    plain = np.abs(cf.schouten_background(g.with_fd(h=1e-3), x) - a_exact).max()
    rich = np.abs(cf.schouten_background(
        g.with_fd(h=1e-3, richardson=True), x) - a_exact).max()
    assert rich < plain / 50


def test_eigen_rel_trivial_and_constructed(rng):
    assert np.allclose(cf.eigen_rel(np.diag([3.0, 1.0, 2.0]), np.eye(3)),
                       [1.0, 2.0, 3.0])
    g = np.diag([2.0, 1.0, 4.0])
    assert np.allclose(cf.eigen_rel(0.7 * g, g), 0.7)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        m = rng.standard_normal((n, n))
        g = m @ m.T + n * np.eye(n)
        d = np.sort(rng.standard_normal(n))
        root = np.real(sqrtm(g))
        a = root @ np.diag(d) @ root
        assert np.allclose(cf.eigen_rel(a, g), d, atol=1e-10)


def test_eigen_rel_rejects_indefinite_metric():
    with pytest.raises(DomainError):
        cf.eigen_rel(np.eye(3), np.diag([1.0, -1.0, 1.0]))


def test_conformal_identity_factor(rng):
    g = cf.MetricField.sphere_normal(4)
    u = cf.ConformalFactor.constant(4, 1.0)
    x = rng.uniform(-0.5, 0.5, 4)
    assert np.allclose(cf.schouten_conformal(g, u, x),
                       cf.schouten_background(g, x), atol=1e-13)
    assert np.allclose(cf.ricci_conformal(g, u, x),
                       cf.ricci_background(g, x), atol=1e-11)


def test_inversion_factor_flattens(rng):
    n = 4
    g = cf.MetricField.flat(n)
    u = cf.ConformalFactor.radial(
        n, lambda r: r ** (2 - n), lambda r: (2 - n) * r ** (1 - n),
        lambda r: (2 - n) * (1 - n) * r ** (-n))
    pts = rng.uniform(0.3, 1.5, (5, n))
    assert np.abs(cf.schouten_conformal(g, u, pts)).max() < 1e-12


def test_nonpositive_factor_rejected():
    g = cf.MetricField.flat(3)
    u = cf.ConformalFactor.from_callable(3, lambda x: x[:, 0])
    with pytest.raises(DomainError):
        cf.schouten_conformal(g, u, np.array([-1.0, 0.0, 0.0]))


def test_eigenvalue_scaling_law(rng):
    # replacing u by c*u multiplies the relative eigenvalues by c^(-4/(n-2))
    n = 5
    g = cf.MetricField.flat(n)
    u = exp_linear_factor(n, 0.4)
    x = rng.uniform(-0.5, 0.5, (4, n))
    base = cf.conformal_schouten_eigs(g, u, x)
    for c in (0.5, 3.0):
        cu = cf.ConformalFactor.from_callable(
            n, lambda y: c * u.value_fn(y), grad=lambda y: c * u.grad_fn(y),
            hess=lambda y: c * u.hess_fn(y))
        scaled = cf.conformal_schouten_eigs(g, cu, x)
        assert np.allclose(scaled, c ** (-4.0 / (n - 2)) * base, rtol=1e-10)


def test_composition_law(rng):
    # factor u*v over g equals factor v over g_u
    n = 4
    g = cf.MetricField.flat(n)
    for _ in range(5):
        a = rng.uniform(-0.4, 0.4, n)
        b = rng.uniform(-0.4, 0.4, n)

        def uval(x, a=a):
            return np.exp(x @ a)

        def ugrad(x, a=a):
            return np.exp(x @ a)[:, None] * a

        def uhess(x, a=a):
            return np.exp(x @ a)[:, None, None] * np.outer(a, a)

        u = cf.ConformalFactor.from_callable(n, uval, grad=ugrad, hess=uhess)
        v = cf.ConformalFactor.from_callable(
            n, lambda x: np.exp(x @ b),
            grad=lambda x: np.exp(x @ b)[:, None] * b,
            hess=lambda x: np.exp(x @ b)[:, None, None] * np.outer(b, b))
        w = cf.ConformalFactor.from_callable(
            n, lambda x: uval(x) * np.exp(x @ b),
            grad=lambda x: (uval(x) * np.exp(x @ b))[:, None] * (a + b),
            hess=lambda x: (uval(x) * np.exp(x @ b))[:, None, None]
            * np.outer(a + b, a + b))
        gu = cf.conformal_metric(g, u)
        x = rng.uniform(-0.5, 0.5, (3, n))
        lhs = cf.schouten_conformal(g, w, x)
        rhs = cf.schouten_conformal(gu, v, x)
        assert np.abs(lhs - rhs).max() < 1e-6


def test_ricci_conformal_against_fd_curvature_oracle(rng):
    # Ricci reconstructed from the Schouten tensor must match the direct
    # curvature of the scaled metric computed by finite differences
    n = 4
    g = cf.MetricField.flat(n)
    u = exp_linear_factor(n, 0.3)
    x = np.array([0.2, -0.1, 0.4, 0.0])
    ric = cf.ricci_conformal(g, u, x)
    gu_fd = cf.conformal_metric(g.with_fd(), u.with_fd(h=1e-4))
    ric_fd = cf.ricci_background(gu_fd, x)
    assert np.abs(ric - ric_fd).max() < 1e-5


def test_ricci_lower_margin_cases(rng):
    n = 4
    gs = cf.MetricField.sphere_normal(n)
    one = cf.ConformalFactor.constant(n, 1.0)
    pts = rng.uniform(-0.5, 0.5, (6, n))
    m = cf.ricci_lower_margin(gs, one, 0.0, pts)
    assert m == pytest.approx(n - 1, rel=1e-9)
    # negative-curvature-like factor dips below the alpha = 0 bound
    g = cf.MetricField.flat(n)
    u = exp_linear_factor(n, 0.8)
    m = cf.ricci_lower_margin(g, u, 0.0, pts)
    assert m < 0
    # and is restored by a sufficiently large alpha
    m2 = cf.ricci_lower_margin(g, u, 2.0, pts)
    assert m2 > 0


def test_domain_guard():
    g = cf.MetricField.sphere_normal(3, chart_radius=1.0)
    with pytest.raises(DomainError):
        g.components(np.array([2.0, 0.0, 0.0]))
