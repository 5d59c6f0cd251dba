"""Stationary channel flow: shooting solver for the coupled velocity,
temperature and magnetic-potential profiles with the algebraic stress
closure, plus residual verification and CSV export.

The streamwise momentum balance has a first integral: Z*a12 +
(1+lambda_hat)*sigma_m*Re*L + grad_amp*y - C0 = 0, so the shear stress a12
is algebraic in (y, Z, L) once the constant C0 is known. The shooting
unknowns are s = (Z'(-1/2), L'(-1/2), C0) and the propagated state is
(u, Z, Z', L, L', q) with q' = Gr (Z - 1) accumulated for the pressure.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .chebyshev import Grid, cgl_grid
from .errors import (
    ClosureBranchLoss,
    ClosureNoConvergence,
    NegativeTemperature,
    NoConvergence,
    ShootingNoConvergence,
)
from .numerics import integrate_ivp, newton_solve
from .errors import SingularJacobian

_FIELDS = ("u", "u_prime", "a11", "a12", "a22", "a11_prime", "a12_prime",
           "a22_prime", "Z", "Z_prime", "L", "L_prime", "P")


def solve_closure(params, a12, seed=None, *, tol=1e-13, max_iter=60):
    """Solve the algebraic stress closure for (a11, a22) at given shear a12.

    The two coupled quadratics are solved by damped Newton with an analytic
    Jacobian, on the branch that vanishes with a12 (physical zero-stress
    limit). A cold start at moderate shear falls back to continuation in
    the squared shear from 0. Returns (a11, a22, iterations).
    """
    g = a12 * a12
    if seed is None:
        small = g * params.beta * params.W < 0.05
        seed = (params.W * (2.0 - params.beta) * g, -params.beta * params.W * g)
        if not small:
            return _closure_continuation(params, g, tol, max_iter)
    try:
        return _closure_newton(params, g, seed, tol, max_iter)
    except (ClosureNoConvergence, ClosureBranchLoss):
        return _closure_continuation(params, g, tol, max_iter)


def _closure_continuation(params, g_target, tol, max_iter):
    x = (0.0, 0.0)
    g = 0.0
    dg = g_target / 8.0
    it_total = 0
    while g < g_target:
        g_next = min(g_target, g + dg)
        try:
            a11, a22, it = _closure_newton(params, g_next, x, tol, max_iter)
        except (ClosureNoConvergence, ClosureBranchLoss):
            dg /= 2.0
            if dg < g_target * 1e-8:
                raise
            continue
        x = (a11, a22)
        g = g_next
        it_total += it
        dg = min(dg * 2.0, g_target / 8.0)
    return x[0], x[1], it_total


def _closure_newton(params, g, seed, tol, max_iter):
    W = params.W
    kb3 = params.k_bar / 3.0
    kt3 = (params.k + 2.0 * params.beta) / 3.0
    beta = params.beta

    x = np.array([float(seed[0]), float(seed[1])])
    for it in range(max_iter):
        a11, a22 = x
        trace = a11 + a22
        K = 1.0 / W + kb3 * trace
        Kt = 1.0 / W + kt3 * trace
        A2 = 1.0 / W + a22
        if A2 <= 0.0:
            raise ClosureBranchLoss(f"total transverse viscosity {A2:.3e} <= 0")
        F = np.array([
            K * a22 + beta * (g + a22 * a22),
            K * a11 + beta * (g + a11 * a11) - 2.0 * g * Kt / A2,
        ])
        fnorm = np.linalg.norm(F)
        # round-off floor of the residual grows with the term magnitudes
        scale = 1.0 + abs(K * a11) + abs(K * a22) + beta * (g + a11 * a11) \
            + 2.0 * g * abs(Kt) / A2
        if fnorm < tol * scale:
            if 2.0 * beta * a22 + K <= 0.0:
                raise ClosureBranchLoss(
                    f"converged to the non-vanishing branch (a22 = {a22:.4g})"
                )
            return a11, a22, it
        J = np.array([
            [kb3 * a22, K + kb3 * a22 + 2.0 * beta * a22],
            [K + kb3 * a11 + 2.0 * beta * a11 - 2.0 * g * kt3 / A2,
             kb3 * a11 - 2.0 * g * (kt3 * A2 - Kt) / (A2 * A2)],
        ])
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if det == 0.0 or not np.isfinite(det):
            raise ClosureNoConvergence(
                "singular closure Jacobian", best=x, residual_norm=fnorm,
                iterations=it,
            )
        dx = np.array([
            (-F[0] * J[1, 1] + F[1] * J[0, 1]) / det,
            (-F[1] * J[0, 0] + F[0] * J[1, 0]) / det,
        ])

        def fnorm_at(xt):
            t11, t22 = xt
            tr = t11 + t22
            Kx = 1.0 / W + kb3 * tr
            Ktx = 1.0 / W + kt3 * tr
            A2x = 1.0 / W + t22
            if A2x <= 0.0:
                return np.inf
            return np.hypot(
                Kx * t22 + beta * (g + t22 * t22),
                Kx * t11 + beta * (g + t11 * t11) - 2.0 * g * Ktx / A2x,
            )

        step = 1.0
        while fnorm_at(x + step * dx) >= fnorm and step > 1e-6:
            step *= 0.5
        x = x + step * dx
    raise ClosureNoConvergence(
        f"closure stalled at residual {fnorm:.3e}", best=x,
        residual_norm=fnorm, iterations=max_iter,
    )


def _shear_from_first_integral(params, y, Z, L, C0):
    """a12 from the momentum first integral."""
    return (C0 - params.grad_amp * y
            - (1.0 + params.lambda_hat) * params.sigma_m * params.Re * L) / Z


@dataclass(frozen=True)
class BaseState:
    """Converged stationary profiles on a Chebyshev grid.

    Node arrays cover u, Z, L and the algebraic stress components together
    with first derivatives (stress derivatives by spectral differentiation
    of node values). sample() interpolates every field at arbitrary y.
    """

    grid: Grid
    params: "model.ModelParams"
    C0: float
    fields: dict          # name -> node array, keys _FIELDS
    shoot_vars: np.ndarray
    newton_residual: float

    def __getattr__(self, name):
        try:
            return self.fields[name]
        except KeyError:
            raise AttributeError(name) from None

    def sample(self, y, names=_FIELDS):
        """Interpolate the named fields at y; returns dict name -> values."""
        stacked = np.array([self.fields[n] for n in names])
        vals = self.grid.interpolate(stacked, y)
        return {n: vals[i] for i, n in enumerate(names)}

    def to_csv(self, path):
        write_base_state_csv(self, path)


def _rhs_factory(params, C0, closure_cache):
    """Right-hand side of the shooting ODE in state (u, Z, Z', L, L', q)."""
    lam1 = 1.0 + params.lambda_hat

    def rhs(y, s):
        u, Z, Zp, L, Lp, q = s
        if Z <= 0.0:
            raise NegativeTemperature(f"Z = {Z:.4g} at y = {y:.4g}")
        a12 = _shear_from_first_integral(params, y, Z, L, C0)
        a11, a22, _ = solve_closure(params, a12, seed=closure_cache[0])
        closure_cache[0] = (a11, a22)
        A2 = 1.0 / params.W + a22
        Kt = model.relax_inverse_tilde(params, a11 + a22)
        up = Kt * float(model.eval_J(params, Z)) * Z * a12 / A2
        Zpp = -(params.A_r * Z * a12 + params.A_m * params.sigma_m * lam1 * L) * up
        Lpp = -lam1 * up / params.b_m
        return np.array([up, Zp, Zpp, Lp, Lpp, params.Gr * (Z - 1.0)])

    return rhs


def _propagate(params, shoot, *, rtol, atol, t_eval=None):
    """Integrate the channel with shooting variables (Z'0, L'0, C0)."""
    Zp0, Lp0, C0 = shoot
    y0 = np.array([0.0, 1.0 + params.theta_bar, Zp0, -params.J_minus, Lp0, 0.0])
    cache = [None]
    rhs = _rhs_factory(params, C0, cache)
    return integrate_ivp(rhs, (-0.5, 0.5), y0, rtol=rtol, atol=atol,
                         t_eval=t_eval)


def _shooting_residual(params, shoot, *, rtol, atol):
    try:
        res = _propagate(params, shoot, rtol=rtol, atol=atol)
    except (NegativeTemperature, ClosureNoConvergence, ClosureBranchLoss,
            OverflowError, FloatingPointError):
        return np.array([1e6, 1e6, 1e6]) * (1.0 + np.linalg.norm(shoot))
    u1, Z1, _, L1, _, _ = res.y[-1]
    return np.array([u1, Z1 - 1.0, L1 + params.J_plus])


def _rest_shoot_vars(params):
    lam1 = 1.0 + params.lambda_hat
    return np.array([
        -params.theta_bar,
        params.J_minus - params.J_plus,
        -lam1 * params.sigma_m * params.Re * params.J_minus - params.grad_amp / 2.0,
    ])


def solve_base_state(params, grid=None, *, rtol=1e-12, atol=1e-14,
                     newton_tol=1e-10, homotopy_step=0.25, shoot_seed=None):
    """Solve the stationary boundary value problem by shooting.

    Newton runs at relaxed integrator tolerance, then the converged shoot
    variables are re-propagated at (rtol, atol) with exact node hits. On
    direct-Newton failure a homotopy marches the loading parameters
    (A_hat, theta_bar, wall potential difference) from the rest state.
    shoot_seed, when given, replaces the rest-configuration starting guess
    (used by parameter sweeps to continue from the previous solution).
    """
    if grid is None:
        grid = cgl_grid(129)
    coarse = dict(rtol=max(rtol, 1e-10), atol=max(atol, 1e-12))

    def residual_for(p):
        return lambda s: _shooting_residual(p, s, **coarse)

    seed = (np.asarray(shoot_seed, dtype=float) if shoot_seed is not None
            else _rest_shoot_vars(params))
    try:
        shoot, rnorm, _ = newton_solve(residual_for(params), seed,
                                       tol=newton_tol, max_iter=40)
    except (NoConvergence, SingularJacobian):
        shoot = _homotopy_solve(params, newton_tol, homotopy_step, residual_for)
        rnorm = np.linalg.norm(_shooting_residual(params, shoot, **coarse))

    # polish at the final tolerance so the boundary values stay tight
    fine = dict(rtol=rtol, atol=atol)
    try:
        shoot, rnorm, _ = newton_solve(
            lambda s: _shooting_residual(params, s, **fine), shoot,
            tol=newton_tol, max_iter=10)
    except NoConvergence as exc:
        if exc.residual_norm > 1e-8:
            raise ShootingNoConvergence(
                f"shooting residual {exc.residual_norm:.3e} above 1e-8",
                best=exc.best, residual_norm=exc.residual_norm,
                iterations=exc.iterations,
            ) from exc
        shoot, rnorm = exc.best, exc.residual_norm

    return _assemble_state(params, grid, shoot, rnorm, rtol=rtol, atol=atol)


def _homotopy_solve(params, newton_tol, step, residual_for):
    """Continuation in the loading from the rest configuration."""
    t = 0.0
    dt = step
    shoot = _rest_shoot_vars(params.with_(
        A_hat=0.0, theta_bar=0.0, J_plus=params.J_minus))
    while t < 1.0:
        t_next = min(1.0, t + dt)
        p = params.with_(
            A_hat=t_next * params.A_hat,
            theta_bar=t_next * params.theta_bar,
            J_plus=params.J_minus + t_next * (params.J_plus - params.J_minus),
        )
        try:
            shoot_next, _, _ = newton_solve(residual_for(p), shoot,
                                            tol=newton_tol, max_iter=30)
        except (NoConvergence, SingularJacobian) as exc:
            dt /= 2.0
            if dt < 1e-3:
                best = getattr(exc, "best", shoot)
                raise ShootingNoConvergence(
                    f"homotopy stalled at loading fraction {t:.4g}",
                    best=best,
                    residual_norm=getattr(exc, "residual_norm", np.inf),
                    iterations=getattr(exc, "iterations", 0),
                ) from exc
            continue
        shoot, t = shoot_next, t_next
        dt = min(step, dt * 2.0)
    return shoot


def _assemble_state(params, grid, shoot, rnorm, *, rtol, atol):
    res = _propagate(params, shoot, rtol=rtol, atol=atol, t_eval=grid.nodes)
    u, Z, Zp, L, Lp, q = res.y.T
    C0 = shoot[2]
    if np.any(Z <= 0):
        raise NegativeTemperature("temperature profile crossed zero")

    a12 = _shear_from_first_integral(params, grid.nodes, Z, L, C0)
    a11 = np.empty_like(a12)
    a22 = np.empty_like(a12)
    seed = None
    for i, s12 in enumerate(a12):
        a11[i], a22[i], _ = solve_closure(params, s12, seed=seed)
        seed = (a11[i], a22[i])
    A2 = 1.0 / params.W + a22
    Kt = model.relax_inverse_tilde(params, a11 + a22)
    up = Kt * model.eval_J(params, Z) * Z * a12 / A2

    D = grid.diff_matrix()
    lam1 = 1.0 + params.lambda_hat
    # pressure: bracket value relative to channel center plus buoyancy integral
    bracket = Z * a22 / params.Re - params.sigma_m * L**2 / 2.0
    q0 = grid.interpolate(q, 0.0)
    b0 = grid.interpolate(bracket, 0.0)
    P = bracket - b0 + (q - q0)

    fields = {
        "u": u, "u_prime": up, "a11": a11, "a12": a12, "a22": a22,
        "a11_prime": D @ a11, "a12_prime": D @ a12, "a22_prime": D @ a22,
        "Z": Z, "Z_prime": Zp, "L": L, "L_prime": Lp, "P": P,
    }
    return BaseState(grid=grid, params=params, C0=C0, fields=fields,
                     shoot_vars=np.asarray(shoot), newton_residual=float(rnorm))


def base_residual(state):
    """Max pointwise residual of every stationary relation at the nodes.

    Second derivatives come from one spectral differentiation of the stored
    first-derivative node values; the pressure relation is differentiated
    the same way.
    """
    p = state.params
    g = state.grid
    y = g.nodes
    D = g.diff_matrix()
    lam1 = 1.0 + p.lambda_hat
    Z, L = state.Z, state.L
    a11, a12, a22 = state.a11, state.a12, state.a22
    up = state.u_prime

    first_integral = Z * a12 + lam1 * p.sigma_m * p.Re * L + p.grad_amp * y - state.C0
    A2 = 1.0 / p.W + a22
    K = model.relax_inverse(p, a11 + a22)
    Kt = model.relax_inverse_tilde(p, a11 + a22)
    gsq = a12 * a12
    closure1 = K * a22 + p.beta * (gsq + a22 * a22)
    closure2 = K * a11 + p.beta * (gsq + a11 * a11) - 2.0 * gsq * Kt / A2
    shear = up - Kt * model.eval_J(p, Z) * Z * a12 / A2
    heat = D @ state.Z_prime + (p.A_r * Z * a12 + p.A_m * p.sigma_m * lam1 * L) * up
    induction = p.b_m * (D @ state.L_prime) + lam1 * up
    bracket = state.P - Z * a22 / p.Re + p.sigma_m * L**2 / 2.0
    pressure = D @ bracket - p.Gr * (Z - 1.0)
    bc = np.array([
        state.u[0], state.u[-1],
        Z[0] - (1.0 + p.theta_bar), Z[-1] - 1.0,
        L[0] + p.J_minus, L[-1] + p.J_plus,
        g.interpolate(state.P, 0.0),
    ])
    pieces = [first_integral, closure1, closure2, shear, heat, induction,
              pressure, bc]
    return max(float(np.max(np.abs(piece))) for piece in pieces)


def write_base_state_csv(state, path):
    from .cli import atomic_write_table
    header = "y,u,a11,a12,a22,Z,L,P"
    cols = [state.grid.nodes, state.u, state.a11, state.a12, state.a22,
            state.Z, state.L, state.P]
    atomic_write_table(path, header, np.column_stack(cols))
