"""Independent reference computations used to pin expected values in tests.

Nothing here touches the package's own discretizations. Only closed-form
calculus (sympy), adaptive quadrature (scipy.integrate.quad) and ODE shooting
(scipy.integrate.solve_ivp) are used, so agreement with the library is a real
cross-check and not a tautology.

Convention shared with the library: on the flat base the metric Laplacian is
exactly twice the Euclidean one, and radial profiles live in 2n real
dimensions, so the radial operator is 2*(f'' + (2n-1)/r f').
"""

import numpy as np
from scipy.integrate import quad, solve_ivp


# ---------------------------------------------------------------------------
# radial ODE shooting
# ---------------------------------------------------------------------------

def shoot_center_value(n, R, curvature=-1.0, base_scalar=0.0, boundary=0.0,
                       bracket=(-60.0, 20.0), tol=1e-12):
    """Center value u(0) of the radial Dirichlet problem on the ball of radius R.

    Solves -2*(u'' + (2n-1)/r u') + base_scalar = curvature*exp((2/n) u)
    with u'(0) = 0 and u(R) = boundary, by bisection on the center value.
    curvature and base_scalar may be floats or callables of r.
    """
    k = base_scalar if callable(base_scalar) else (lambda r, v=base_scalar: v)
    K = curvature if callable(curvature) else (lambda r, v=curvature: v)
    p = 2.0 / n
    drift = 2 * n - 1

    def rhs_u(r, u):
        # laplacian value demanded by the equation; exponent clipped so the
        # blow-up event fires before exp overflows
        return 0.5 * (k(r) - K(r) * np.exp(min(p * u, 300.0)))

    def endpoint(gamma):
        r0 = 1e-8 * max(R, 1.0)
        alpha = rhs_u(0.0, gamma) / (4.0 * n)
        y0 = [gamma + alpha * r0 ** 2, 2.0 * alpha * r0]
        blew_up = False

        def f(r, y):
            return [y[1], rhs_u(r, y[0]) - drift * y[1] / r]

        def explode(r, y):
            return y[0] - 80.0
        explode.terminal = True

        sol = solve_ivp(f, (r0, R), y0, rtol=1e-11, atol=1e-13,
                        events=explode, dense_output=False)
        if sol.t[-1] < R * (1 - 1e-9):
            blew_up = True
        return (np.inf if blew_up else sol.y[0][-1] - boundary)

    lo, hi = bracket
    flo, fhi = endpoint(lo), endpoint(hi)
    if not (flo < 0 < fhi or flo == 0 or fhi == 0):
        raise RuntimeError("shooting bracket does not straddle the boundary value")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = endpoint(mid)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def shoot_linear_center_value(n, R, shift, source, boundary=0.0):
    """Center value v(0) for (-2*laplacian + shift) v = source, v(R) = boundary.

    Linear problem: integrates one particular and one homogeneous solution and
    combines them to hit the boundary value.
    """
    drift = 2 * n - 1
    g = source if callable(source) else (lambda r, v=source: v)

    def integrate(center, homogeneous):
        r0 = 1e-8 * max(R, 1.0)
        src = (lambda r: 0.0) if homogeneous else g
        alpha = (shift * center - src(0.0)) / 2.0 / (4.0 * n)
        y0 = [center + alpha * r0 ** 2, 2 * alpha * r0]

        def f(r, y):
            return [y[1], (shift * y[0] - src(r)) / 2.0 - drift * y[1] / r]

        sol = solve_ivp(f, (r0, R), y0, rtol=1e-12, atol=1e-14)
        return sol.y[0][-1]

    v0_end = integrate(0.0, homogeneous=False)
    h_end = integrate(1.0, homogeneous=True) - integrate(0.0, homogeneous=True)
    return (boundary - v0_end) / h_end


# ---------------------------------------------------------------------------
# comparison-envelope quadrature
# ---------------------------------------------------------------------------

def growth_envelope(t, n, c1, c2, alpha=2.0, beta=1.0):
    return c1 / (4.0 * n) * (1.0 + t) ** alpha + n * c2 ** 2 / 2.0 * (1.0 + t) ** (2 * beta)


def profile_h(t, n, c1, c2, alpha=2.0, beta=1.0):
    """h(t) = (exp(int_0^t sqrt(G)) - 1)/sqrt(G(0)) by adaptive quadrature."""
    integral, err = quad(lambda s: np.sqrt(growth_envelope(s, n, c1, c2, alpha, beta)),
                         0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-9:
        raise RuntimeError("quadrature did not converge")
    return (np.exp(integral) - 1.0) / np.sqrt(growth_envelope(0.0, n, c1, c2, alpha, beta))


def envelope_integral(t, n, c1, c2, alpha=2.0, beta=1.0):
    integral, _ = quad(lambda s: np.sqrt(growth_envelope(s, n, c1, c2, alpha, beta)),
                       0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)
    return integral


# ---------------------------------------------------------------------------
# symbolic radial calculus (forward maps, manufactured right-hand sides)
# ---------------------------------------------------------------------------

def symbolic_radial_laplacian(profile_fn, n):
    """Exact metric Laplacian 2*(f'' + (2n-1)/r f') of a sympy radial profile.

    profile_fn maps a sympy symbol to an expression. Returns a numpy callable.
    """
    import sympy as sp
    r = sp.symbols('r', positive=True)
    u = profile_fn(r)
    lap = 2 * (sp.diff(u, r, 2) + (2 * n - 1) / r * sp.diff(u, r))
    return sp.lambdify(r, sp.simplify(lap), 'numpy')


def symbolic_forward_scalar(profile_fn, n, base_scalar=0):
    """Exact scalar curvature of the conformally rescaled flat model.

    S_new(r) = exp(-(2/n) u) * (-2*laplacian(u) + base_scalar) for the radial
    sympy profile u(r), as a numpy callable.
    """
    import sympy as sp
    r = sp.symbols('r', positive=True)
    u = profile_fn(r)
    lap = 2 * (sp.diff(u, r, 2) + (2 * n - 1) / r * sp.diff(u, r))
    S = sp.exp(-sp.Rational(2, n) * u) * (-lap + base_scalar)
    return sp.lambdify(r, sp.simplify(S), 'numpy')


# ---------------------------------------------------------------------------
# misc helpers
# ---------------------------------------------------------------------------

def observed_orders(hs, errors):
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])


def nonexist_center_closed_form(R):
    """Closed form for the n=1 flat-model nonexistence Dirichlet value.

    With u = v + log(sqrt(2)) the problem becomes lap(v) = e^{2v},
    v(R) = -log(sqrt(2)), whose regular radial solution is
    v(r) = log(2a/(a^2 - r^2)) with a = sqrt(2) + sqrt(2 + R^2).
    At R = 4 this collapses to u(0) = -log 2 exactly.
    """
    a = np.sqrt(2.0) + np.sqrt(2.0 + R * R)
    return np.log(2.0 / a) + 0.5 * np.log(2.0)
