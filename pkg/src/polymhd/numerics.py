"""Shared numerical kernels: explicit Runge-Kutta IVP integration, damped
Newton iteration, adaptive Gauss-Kronrod quadrature and winding numbers.

The integrator is a Dormand-Prince 5(4) pair with two output modes:

* t_eval clipping: steps are shortened so requested output points fall on
  step boundaries exactly. Profiles sampled this way carry only the local
  truncation error of the integrator, which keeps subsequent spectral
  differentiation of the node values accurate.
* free dense output via cubic Hermite interpolation (used for plotting).

All kernels accept real or complex state vectors of any shape; right-hand
sides receive and return arrays of that shape.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    NonFiniteRhs,
    SingularJacobian,
    StepLimitExceeded,
    ZeroOnContour,
)

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_E = _DP_B5 - _DP_B4


def _method_tables(method):
    """Stage data for the supported explicit pairs.

    Returns (n_stages, C, stage_rows, B, error_fn, order_exponent) where
    stage_rows[i] lists the nonzero (j, a_ij) pairs and error_fn(k, h)
    produces the local error estimate from the stage array k (which holds
    one trailing slot for the first-same-as-last evaluation).
    """
    if method == "dp5":
        rows = [[(j, a) for j, a in enumerate(_DP_A[i]) if a != 0.0]
                for i in range(7)]

        def error_dp5(k, h_signed):
            return h_signed * sum(e * k[i] for i, e in enumerate(_DP_E)
                                  if e != 0.0)

        return 7, _DP_C, rows, _DP_B5, error_dp5, -0.2
    if method == "dop853":
        from . import _rk8_tableau as t8
        rows = [[(j, a) for j, a in enumerate(t8.A[i]) if a != 0.0]
                for i in range(t8.N_STAGES)]

        def error_853(k, h_signed):
            err5 = sum(e * k[i] for i, e in enumerate(t8.E5) if e != 0.0)
            err3 = sum(e * k[i] for i, e in enumerate(t8.E3) if e != 0.0)
            denom = np.hypot(np.abs(err5), 0.1 * np.abs(err3))
            with np.errstate(divide="ignore", invalid="ignore"):
                corr = np.where(denom > 0.0, np.abs(err5) / denom, 1.0)
            return h_signed * err5 * corr

        return t8.N_STAGES, t8.C, rows, t8.B, error_853, -1.0 / 8.0
    raise ValueError(f"unknown method {method!r}")


@dataclass
class IvpResult:
    t: np.ndarray          # accepted step endpoints (or t_eval points)
    y: np.ndarray          # states at t, shape (len(t),) + state.shape
    n_steps: int
    n_rejected: int


def integrate_ivp(
    rhs,
    t_span,
    y0,
    *,
    rtol=1e-10,
    atol=1e-12,
    t_eval=None,
    max_steps=1_000_000,
    first_step=None,
    callback=None,
    store_trajectory=True,
    method="dp5",
):
    """Integrate y' = rhs(t, y) over t_span with a DP5(4) embedded pair.

    If t_eval is given, steps are clipped so each requested point is a step
    endpoint, and only those points are stored. callback(t, y) -> y may
    rescale the state after each accepted step (used for shooting
    renormalization); it must not change the shape. With
    store_trajectory=False only the initial and final states are kept.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    direction = 1.0 if t1 >= t0 else -1.0
    y = np.asarray(y0).copy()
    dtype = np.result_type(y.dtype, float)
    y = y.astype(dtype)

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(t_eval) * direction <= 0):
            raise ValueError("t_eval must be monotone in the integration direction")
        if not (np.isclose(t_eval[0], t0) and np.isclose(t_eval[-1], t1)):
            raise ValueError("t_eval must start and end at the span endpoints")

    n_stages, C_tab, stage_rows, B_tab, error_fn, exponent = _method_tables(method)
    extra_eval = method == "dop853"
    fsal_idx = n_stages if extra_eval else n_stages - 1
    b_terms = [(i, b) for i, b in enumerate(B_tab) if b != 0.0]
    k = np.empty((fsal_idx + 1,) + y.shape, dtype=dtype)
    f0 = np.asarray(rhs(t0, y), dtype=dtype)
    if not np.all(np.isfinite(f0.view(float))):
        raise NonFiniteRhs(f"non-finite right-hand side at t={t0}")
    k[0] = f0

    span = abs(t1 - t0)
    if first_step is None:
        scale = atol + rtol * np.max(np.abs(y)) if y.size else atol
        d0 = np.max(np.abs(y)) if y.size else 0.0
        d1 = np.max(np.abs(f0))
        h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > THRESH) else span * 1e-4
        h = min(max(h, span * 1e-10), span * 0.1)
    else:
        h = min(abs(first_step), span)

    ts = [t0]
    ys = [y.copy()]
    t = t0
    n_steps = 0
    n_rejected = 0
    eval_idx = 1 if t_eval is not None else None
    if t_eval is not None:
        ts = [t_eval[0]]

    while (t1 - t) * direction > 0:
        if n_steps + n_rejected > max_steps:
            raise StepLimitExceeded(
                f"exceeded {max_steps} steps at t={t:.6g} (span {t0:.3g}..{t1:.3g})"
            )
        h = min(h, abs(t1 - t))
        clipped = False
        if t_eval is not None and eval_idx < t_eval.size:
            dist = (t_eval[eval_idx] - t) * direction
            if h >= dist - 1e-15 * span:
                h = dist
                clipped = True
        h_signed = h * direction

        for i in range(1, n_stages):
            dy = sum(a * k[j] for j, a in stage_rows[i])
            k[i] = rhs(t + C_tab[i] * h_signed, y + h_signed * dy)
        y_new = y + h_signed * sum(b * k[i] for i, b in b_terms)
        if extra_eval:
            k[fsal_idx] = rhs(t + h_signed, y_new)
        err_vec = error_fn(k, h_signed)

        if not np.all(np.isfinite(y_new.view(float))):
            n_rejected += 1
            h *= 0.25
            if h < 1e-15 * span:
                raise NonFiniteRhs(f"state became non-finite near t={t:.6g}")
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.max(np.abs(err_vec) / scale) if y.size else 0.0

        if err <= 1.0:
            t_new = t + h_signed
            y = y_new
            k[0] = k[fsal_idx] if not clipped \
                else np.asarray(rhs(t_new, y), dtype=dtype)
            t = t_new
            n_steps += 1
            if callback is not None:
                y = callback(t, y)
                k[0] = np.asarray(rhs(t, y), dtype=dtype)
            if t_eval is None:
                if store_trajectory:
                    ts.append(t)
                    ys.append(y.copy())
            elif clipped:
                ts.append(t_eval[eval_idx])
                ys.append(y.copy())
                eval_idx += 1
            factor = 0.9 * err ** exponent if err > 1e-14 else 5.0
            h *= min(5.0, factor)
        else:
            n_rejected += 1
            h *= max(0.1, 0.9 * err ** exponent)

    if t_eval is None and not store_trajectory:
        ts.append(t)
        ys.append(y.copy())
    return IvpResult(np.array(ts), np.array(ys), n_steps, n_rejected)


THRESH = 1e-12


def integrate_dense(rhs, t_span, y0, t_out, *, rtol=1e-10, atol=1e-12):
    """Integrate and sample at t_out by cubic Hermite interpolation.

    t_out need not be step endpoints; accuracy at samples is one order
    below the integrator's. Use integrate_ivp with t_eval when sampled
    values feed spectral differentiation.
    """
    res = integrate_ivp(rhs, t_span, y0, rtol=rtol, atol=atol)
    t_out = np.asarray(t_out, dtype=float)
    t_nodes, y_nodes = res.t, res.y
    direction = 1.0 if t_span[1] >= t_span[0] else -1.0
    out = np.empty((t_out.size,) + y_nodes.shape[1:], dtype=y_nodes.dtype)
    tt = t_nodes * direction
    for i, tq in enumerate(t_out):
        j = np.searchsorted(tt, tq * direction)
        j = min(max(j, 1), t_nodes.size - 1)
        ta, tb = t_nodes[j - 1], t_nodes[j]
        ya, yb = y_nodes[j - 1], y_nodes[j]
        h = tb - ta
        fa = np.asarray(rhs(ta, ya))
        fb = np.asarray(rhs(tb, yb))
        s = (tq - ta) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out[i] = h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb
    return out


def newton_solve(fun, x0, *, tol=1e-12, max_iter=50, fd_step=None, damping=True):
    """Damped Newton iteration with forward-difference Jacobian.

    fun maps an (n,) real or complex vector to an (m,) residual with m == n
    for real systems or a complex analytic map (complex Newton uses the
    same formula). Returns (x, residual_norm, iterations). Raises
    NoConvergence with the best iterate attached.
    """
    x = np.atleast_1d(np.asarray(x0)).astype(np.result_type(np.asarray(x0).dtype, float))
    n = x.size
    f = np.atleast_1d(np.asarray(fun(x)))
    fnorm = np.linalg.norm(f)
    best = (x.copy(), fnorm)
    for it in range(max_iter):
        if fnorm < tol:
            return x, fnorm, it
        J = np.empty((f.size, n), dtype=np.result_type(f.dtype, x.dtype))
        for j in range(n):
            h = fd_step if fd_step is not None else np.sqrt(np.finfo(float).eps) * (
                1.0 + abs(x[j])
            )
            xp = x.copy()
            xp[j] += h
            J[:, j] = (np.atleast_1d(fun(xp)) - f) / h
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(f"singular Jacobian at iteration {it}") from exc
        if not np.all(np.isfinite(dx.view(float))):
            raise SingularJacobian(f"non-finite Newton step at iteration {it}")
        step = 1.0
        accepted = False
        while step >= 1e-10:
            x_new = x + step * dx
            f_new = np.atleast_1d(np.asarray(fun(x_new)))
            fn = np.linalg.norm(f_new)
            if np.isfinite(fn) and (fn < fnorm or not damping):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise NoConvergence(
                f"line search failed at residual {best[1]:.3e}",
                best=best[0], residual_norm=best[1], iterations=it,
            )
        x, f, fnorm = x_new, f_new, fn
        if fnorm < best[1]:
            best = (x.copy(), fnorm)
    if best[1] < tol:
        return best[0], best[1], max_iter
    raise NoConvergence(
        f"Newton stalled at residual {best[1]:.3e} after {max_iter} iterations",
        best=best[0],
        residual_norm=best[1],
        iterations=max_iter,
    )


# Gauss 7 / Kronrod 15 nodes and weights on [-1, 1]
_K15_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_K15_W = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_G7_W = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _gk15(f, a, b):
    mid = (a + b) / 2
    half = (b - a) / 2
    fx = f(mid + half * _K15_X)
    k = half * np.sum(_K15_W * fx)
    g = half * np.sum(_G7_W * fx[1::2])
    return k, abs(k - g)


def quad_adaptive(f, a, b, *, tol=1e-12, max_depth=50):
    """Adaptive G7/K15 quadrature of a vectorized real or complex integrand."""
    stack = [(float(a), float(b), 0)]
    total = 0.0 + 0.0j
    err_total = 0.0
    while stack:
        lo, hi, depth = stack.pop()
        val, err = _gk15(f, lo, hi)
        local_tol = tol * (hi - lo) / (b - a)
        if err <= local_tol or depth >= max_depth:
            if depth >= max_depth and err > local_tol:
                raise NoConvergence(
                    f"quadrature did not converge on [{lo:.3g}, {hi:.3g}]",
                    best=val,
                    residual_norm=err,
                    iterations=depth,
                )
            total += val
            err_total += err
        else:
            midp = (lo + hi) / 2
            stack.append((lo, midp, depth + 1))
            stack.append((midp, hi, depth + 1))
    result = total if np.iscomplexobj(np.asarray(f((a + b) / 2 + np.zeros(1)))) else total.real
    return result, err_total


def winding_number(f, rect, n_samples=256, *, max_refine=16, min_abs=1e-13):
    """Winding number of f around 0 along a rectangle boundary.

    rect is (re_min, re_max, im_min, im_max). The boundary is sampled and
    any two consecutive samples whose phase jump exceeds pi/2 trigger local
    bisection refinement. Raises ZeroOnContour if |f| falls below min_abs
    at a sample.
    """
    re0, re1, im0, im1 = rect
    corners = [re0 + 1j * im0, re1 + 1j * im0, re1 + 1j * im1, re0 + 1j * im1]
    pts = []
    per_side = max(n_samples // 4, 8)
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        pts.extend(a + (b - a) * j / per_side for j in range(per_side))
    pts.append(pts[0])

    cache = {}

    def fval(z):
        key = (z.real, z.imag)
        if key not in cache:
            v = f(z)
            if abs(v) < min_abs:
                raise ZeroOnContour(
                    f"|f| = {abs(v):.3e} at {z:.6g} on the certification contour"
                )
            cache[key] = v
        return cache[key]

    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += _arc_phase(fval, a, b, max_refine)
    w = total / (2 * np.pi)
    w_int = int(round(w))
    if abs(w - w_int) > 0.25:
        raise NoConvergence(
            f"winding number did not settle on an integer (got {w:.3f})",
            best=w, residual_norm=abs(w - w_int), iterations=max_refine,
        )
    return w_int


def _arc_phase(fval, a, b, depth):
    d = np.angle(fval(b) / fval(a))
    if abs(d) <= np.pi / 2 or depth <= 0:
        return d
    mid = (a + b) / 2
    return _arc_phase(fval, a, mid, depth - 1) + _arc_phase(fval, mid, b, depth - 1)
