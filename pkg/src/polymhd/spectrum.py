"""Discrete spectrum of the linearized problem by renormalized shooting.

For fixed wavenumber omega, lambda is an eigenvalue iff the 5-dimensional
solution basis started in the wall-compatible subspace at y = -1/2 hits a
singular boundary matrix at y = +1/2. The dispersion function is the log
of that 5x5 determinant with QR renormalization corrections accumulated
along the channel, so root finding and argument-principle certification
work at |lambda| ~ 10^2 without overflow.

All heavy evaluations are batched over lambda: one adaptive integration
sweep propagates the (n_lambda, 10, 5) basis stack with shared step-size
control, which keeps Newton refinement and contour sampling fast.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import linearized
from .errors import (
    ContinuousSpectrumPoint,
    NoConvergence,
    StiffnessOverflow,
    UncertifiedRoots,
    ZeroOnContour,
)
from .numerics import integrate_ivp


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    renorm_threshold: float = 1e3
    max_steps: int = 1_000_000
    variant: str = "exact_elimination"
    method: str = "dop853"


@dataclass(frozen=True)
class DispersionEvaluation:
    lam: complex
    omega: float
    log_det: complex
    renorm_count: int


@dataclass(frozen=True)
class Eigenvalue:
    lam: complex
    residual: float
    newton_iters: int
    seed: complex
    certified: bool


@dataclass
class SpectrumResult:
    omega: float
    params: object
    eigenvalues: list
    search_region: tuple
    missed_count_estimate: int
    winding_total: int = 0


class _BatchPropagator:
    """Propagates the 5-column solution basis for a batch of lambda."""

    def __init__(self, base, omega, cfg):
        self.base = base
        self.omega = omega
        self.cfg = cfg
        self.exact = cfg.variant == "exact_elimination"
        # freeze all y-dependence at the base grid nodes; per-step values
        # come from one barycentric matvec instead of re-deriving rheology
        field = linearized.coeff_field(base, base.grid.nodes)
        D, P, g11, g22 = linearized.assemble_parts(field, omega)
        scaf = linearized.elimination_scaffold(field, omega)
        n = field.n
        self._stack = np.ascontiguousarray(np.hstack([
            D.reshape(n, 100).astype(complex), P.reshape(n, 100),
            g11, g22, scaf,
        ]).T)                                         # (233, n)
        self._grid = base.grid

    def _rhs_factory(self, lams):
        lams_col = lams[:, None, None]
        omega = self.omega
        exact = self.exact
        nodes = self._grid.nodes
        bw = self._grid._bary_weights
        stack = self._stack
        m = lams.size
        det_floor = 1e-10 * (1.0 + np.abs(lams) ** 2)
        rhs1 = np.zeros((m, 4), dtype=complex)
        rhs2 = np.zeros((m, 4), dtype=complex)
        e11_trunc = np.zeros((m, 4), dtype=complex)
        e22_trunc = np.zeros((m, 4), dtype=complex)

        def rhs(y, Y):
            diff = y - nodes
            hit = np.nonzero(diff == 0.0)[0]
            if hit.size:
                vec = stack[:, hit[0]]
            else:
                c = bw / diff
                vec = (stack @ c) / c.sum()
            D = vec[:100].reshape(10, 10)
            P = vec[100:200].reshape(10, 10)
            g11 = vec[200:210]
            g22 = vec[210:220]
            dY = lams_col * (D @ Y) + P @ Y
            if exact:
                adv = lams + 1j * omega * vec[232]
                m11 = adv + vec[220]
                m22 = adv + vec[223]
                det = m11 * m22 - vec[221] * vec[222]
                if np.any(np.abs(det) < det_floor):
                    raise ContinuousSpectrumPoint(
                        "normal-stress reduction singular: |det| below floor"
                    )
                rhs1[:, 0] = vec[224]
                rhs1[:, 1] = vec[225]
                rhs1[:, 2] = vec[226] + vec[228] * adv
                rhs1[:, 3] = vec[227]
                rhs2[:, 0] = vec[229]
                rhs2[:, 1] = vec[230]
                rhs2[:, 2] = vec[231]
                det_e = det[:, None]
                e11 = (m22[:, None] * rhs1 - vec[221] * rhs2) / det_e
                e22 = (m11[:, None] * rhs2 - vec[222] * rhs1) / det_e
            else:
                e11_trunc[:, 2] = vec[228]   # scaffold slot: 2 a12h/alpha2
                e11, e22 = e11_trunc, e22_trunc
            Ysub = Y[:, (0, 1, 2, 4), :]             # (m, 4, 5)
            s11 = np.einsum("mj,mjk->mk", e11, Ysub)  # (m, 5)
            s22 = np.einsum("mj,mjk->mk", e22, Ysub)
            dY += g11[None, :, None] * s11[:, None, :]
            dY += g22[None, :, None] * s22[:, None, :]
            return dY

        return rhs

    def log_dets(self, lams, *, rtol=None, atol=None):
        """Dispersion log-determinants for a 1-D array of lambda.

        rtol/atol override the configured integration tolerances; contour
        work only needs phases to a fraction of pi and runs much looser
        than Newton refinement.
        """
        lams = np.asarray(lams, dtype=complex).ravel()
        m = lams.size
        Y0 = np.zeros((m, 10, 5), dtype=complex)
        for col, idx in enumerate(linearized.FREE_INDICES):
            Y0[:, idx, col] = 1.0
        acc = np.zeros(m, dtype=complex)
        renorms = [0]
        threshold = self.cfg.renorm_threshold

        def renormalize(y, Y):
            norms = np.linalg.norm(Y.reshape(m, -1), axis=1)
            if np.max(norms) < threshold and np.min(norms) > 1.0 / threshold:
                return Y
            Q, R = np.linalg.qr(Y)
            diag = np.einsum("mii->mi", R)
            if np.any(diag == 0):
                raise StiffnessOverflow("rank-deficient basis during renormalization")
            acc[:] += np.sum(np.log(diag.astype(complex)), axis=1)
            renorms[0] += 1
            return Q

        rhs = self._rhs_factory(lams)
        res = integrate_ivp(rhs, (-0.5, 0.5), Y0,
                            rtol=self.cfg.rtol if rtol is None else rtol,
                            atol=self.cfg.atol if atol is None else atol,
                            max_steps=self.cfg.max_steps,
                            callback=renormalize, store_trajectory=False,
                            method=self.cfg.method)
        Yend = res.y[-1]
        Bmat = Yend[:, linearized.BOUNDARY_INDICES, :]   # (m, 5, 5)
        sign, logabs = np.linalg.slogdet(Bmat)
        if np.any(sign == 0):
            bad = lams[np.where(sign == 0)[0][0]]
            raise StiffnessOverflow(f"exactly singular boundary minor at {bad}")
        return logabs + np.log(sign.astype(complex)) + acc, renorms[0]


def dispersion(base, lam, omega, cfg=None):
    """Evaluate the dispersion function at a single lambda."""
    cfg = cfg or IntegratorConfig()
    prop = _BatchPropagator(base, omega, cfg)
    ld, renorms = prop.log_dets(np.array([lam], dtype=complex))
    return DispersionEvaluation(lam=complex(lam), omega=omega,
                                log_det=complex(ld[0]), renorm_count=renorms)


def continuous_spectrum_scan(base, omega, *, re_range=(-30.0, 5.0), n_re=600,
                             threshold=1e-6):
    """Real-axis intervals where the normal-stress reduction degenerates.

    Scans lambda over a real segment and y over the base grid; returns a
    list of (re_min, re_max) intervals to exclude from root searches.
    """
    field = linearized.coeff_field(base, base.grid.nodes)
    lams = np.linspace(re_range[0], re_range[1], n_re).astype(complex)
    det = linearized.det2x2(field, lams, omega)     # (n_re, n_nodes)
    bad = np.min(np.abs(det), axis=1) < threshold * (1.0 + np.abs(lams)) ** 2
    intervals = []
    start = None
    for i, flag in enumerate(bad):
        if flag and start is None:
            start = lams[i].real
        elif not flag and start is not None:
            intervals.append((start, lams[i - 1].real))
            start = None
    if start is not None:
        intervals.append((start, lams[-1].real))
    return intervals


#: integration tolerances for contour phases (integer winding only needs
#: the argument to a fraction of pi)
WINDING_RTOL = 1e-6
WINDING_ATOL = 1e-9


def _wrap_phase(d):
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def _contour_points(rect, per_side):
    re0, re1, im0, im1 = rect
    corners = np.array([re0 + 1j * im0, re1 + 1j * im0,
                        re1 + 1j * im1, re0 + 1j * im1])
    pts = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        t = np.arange(per_side) / per_side
        pts.append(a + (b - a) * t)
    return np.concatenate(pts)


def _winding_batch(prop, rects, *, per_side=16, max_refine=12,
                   min_logabs=-40.0):
    """Argument-principle windings on several rectangles in one sweep.

    Phase increments come from the imaginary part of the dispersion
    log-determinant; segments with wrapped jumps above pi/2 are bisected,
    and every refinement level across all rectangles is evaluated in one
    batched propagation. Returns one entry per rectangle: an int winding or
    an exception instance (ZeroOnContour below the magnitude floor,
    NoConvergence when refinement does not settle)."""
    states = []
    vals = {}
    for rect in rects:
        pts = _contour_points(rect, per_side)
        segs = [(pts[i], pts[(i + 1) % pts.size]) for i in range(pts.size)]
        states.append({"segs": segs, "result": None})

    def eval_points(pairs):
        """pairs: (point, rect index); flags owners of vanishing points."""
        fresh = {}
        for z, i in pairs:
            if z not in vals:
                fresh.setdefault(z, []).append(i)
        if fresh:
            zs = np.array(list(fresh), dtype=complex)
            ld, _ = prop.log_dets(zs, rtol=WINDING_RTOL, atol=WINDING_ATOL)
            for z, v in zip(zs, ld):
                vals[z] = v
        for z, i in pairs:
            if vals[z].real < min_logabs and states[i]["result"] is None:
                states[i]["result"] = ZeroOnContour(
                    "determinant vanishes on the contour")

    eval_points([(z, i) for i, st in enumerate(states)
                 for seg in st["segs"] for z in seg])
    totals = [None] * len(states)
    for _ in range(max_refine):
        mid_pairs = []
        for i, st in enumerate(states):
            if st["result"] is not None or totals[i] is not None:
                continue
            jumps = np.array([_wrap_phase((vals[b] - vals[a]).imag)
                              for a, b in st["segs"]])
            fine = np.abs(jumps) > np.pi / 2
            if not fine.any():
                totals[i] = float(np.sum(jumps))
                continue
            new_segs = []
            for (a, b), f in zip(st["segs"], fine):
                if f:
                    mid = (a + b) / 2.0
                    mid_pairs.append((mid, i))
                    new_segs.extend([(a, mid), (mid, b)])
                else:
                    new_segs.append((a, b))
            st["segs"] = new_segs
        if not mid_pairs and all(
                t is not None or st["result"] is not None
                for t, st in zip(totals, states)):
            break
        eval_points(mid_pairs)
    out = []
    for i, st in enumerate(states):
        if st["result"] is not None:
            out.append(st["result"])
        elif totals[i] is None:
            out.append(NoConvergence("contour refinement did not settle",
                                     best=None, residual_norm=np.nan,
                                     iterations=max_refine))
        else:
            w = totals[i] / (2.0 * np.pi)
            w_int = int(round(w))
            if abs(w - w_int) > 0.25:
                out.append(NoConvergence(f"non-integer winding {w:.3f}",
                                         best=w, residual_norm=abs(w - w_int),
                                         iterations=max_refine))
            else:
                out.append(w_int)
    return out


def winding_from_logdet(prop, rect, *, per_side=16, max_refine=12,
                        min_logabs=-40.0):
    """Argument-principle winding of the boundary determinant on rect."""
    res = _winding_batch(prop, [rect], per_side=per_side,
                         max_refine=max_refine, min_logabs=min_logabs)[0]
    if isinstance(res, Exception):
        raise res
    return res


def _batch_newton(prop, seeds, *, tol=1e-10, max_iter=12):
    """Logarithmic-derivative Newton on the dispersion function, batched.

    Returns (roots, iters, converged) arrays. Near a simple root the
    dispersion behaves as log(lam - lam0) + analytic, so the pair of
    evaluations at (lam, lam + h) is inverted exactly:
    exp(dld) = (lam + h - lam0)/(lam - lam0) gives the update
    -h/(exp(dld) - 1), which reduces to the plain Newton step -1/(dld/h)
    when |lam - lam0| >> h and stays accurate when the root is closer than
    the difference step. The imaginary part of dld is wrapped to (-pi, pi].
    """
    lams = np.asarray(seeds, dtype=complex).copy()
    m = lams.size
    iters = np.zeros(m, dtype=int)
    done = np.zeros(m, dtype=bool)
    for it in range(max_iter):
        active = ~done
        if not active.any():
            break
        la = lams[active]
        h = 1e-6 * (1.0 + np.abs(la))
        batch = np.concatenate([la, la + h])
        ld, _ = prop.log_dets(batch)
        dld = ld[la.size:] - ld[:la.size]
        dld = dld.real + 1j * _wrap_phase(dld.imag)
        growth = np.expm1(dld)
        tiny = np.abs(growth) < 1e-300
        growth[tiny] = 1e-300
        step = -h / growth
        # guard wild steps far from any root
        cap = 0.5 * (1.0 + np.abs(la))
        big = np.abs(step) > cap
        step[big] *= (cap[big] / np.abs(step[big]))
        lams[active] = la + step
        iters[active] += 1
        newly = np.abs(step) < tol * (1.0 + np.abs(lams[active]))
        idx = np.where(active)[0]
        done[idx[newly]] = True
    return lams, iters, done


def _residuals(prop, roots, *, delta_scale=0.01):
    """Normalized determinant magnitude at roots vs nearby reference."""
    roots = np.asarray(roots, dtype=complex)
    m = roots.size
    if m == 0:
        return np.zeros(0)
    d = delta_scale * (1.0 + np.abs(roots))
    batch = np.concatenate([roots, roots + d, roots - d,
                            roots + 1j * d, roots - 1j * d])
    # full accuracy: at the root the determinant sits orders of magnitude
    # below the integration noise of any looser tolerance
    ld, _ = prop.log_dets(batch)
    ld = ld.reshape(5, m)
    ref = np.max(ld[1:].real, axis=0)
    return np.exp(ld[0].real - ref)


def find_eigenvalues(base, omega, region, seeds, cfg=None, *,
                     residual_tol=1e-8, dedup_tol=1e-6, certify=True,
                     band_check=True, strict=True):
    """Refine seeds to certified eigenvalues inside a complex rectangle.

    region is (re_min, re_max, im_min, im_max). Each converged, deduplicated
    root is certified by a winding number of exactly 1 on a surrounding
    rectangle (half-width max(0.1, 0.05 |lambda|), halved while it captures
    more than one zero). With band_check, the total winding over the region
    is compared against the number of roots found inside it; a mismatch
    raises UncertifiedRoots when strict, otherwise the result is returned
    with missed_count_estimate set so callers can still export it.
    """
    cfg = cfg or IntegratorConfig()
    prop = _BatchPropagator(base, omega, cfg)
    seeds = np.asarray(list(seeds), dtype=complex)

    roots, iters, converged = _batch_newton(prop, seeds)
    order = np.argsort(roots.imag, kind="stable")
    eigs = []
    kept = []
    for i in order:
        if not converged[i]:
            continue
        lam = roots[i]
        if any(abs(lam - other) < dedup_tol for other in kept):
            continue
        kept.append(lam)
        eigs.append([lam, iters[i], seeds[i]])

    lam_arr = np.array([e[0] for e in eigs], dtype=complex)
    res_arr = _residuals(prop, lam_arr)

    cert_arr = np.zeros(lam_arr.size, dtype=bool)
    if certify and lam_arr.size:
        eligible = np.nonzero(res_arr <= residual_tol)[0]
        if eligible.size:
            cert_arr[eligible] = _certify_batch(prop, lam_arr[eligible])
    out = []
    for (lam, it, seed), res, cert in zip(eigs, res_arr, cert_arr):
        out.append(Eigenvalue(lam=complex(lam), residual=float(res),
                              newton_iters=int(it), seed=complex(seed),
                              certified=bool(cert)))

    missed = 0
    winding_total = 0
    if band_check:
        re0, re1, im0, im1 = region
        inside = [e for e in out
                  if re0 <= e.lam.real <= re1 and im0 <= e.lam.imag <= im1]
        winding_total = winding_from_logdet(prop, region, per_side=32)
        missed = winding_total - len(inside)
        if missed != 0 and strict:
            raise UncertifiedRoots(
                f"winding {winding_total} != {len(inside)} roots in region",
                winding_total=winding_total, found=len(inside),
            )
    return SpectrumResult(omega=omega, params=base.params, eigenvalues=out,
                          search_region=tuple(region),
                          missed_count_estimate=max(missed, 0),
                          winding_total=winding_total)


def _certify_batch(prop, lams, *, max_shrink=6):
    """Certify each lambda by a winding of exactly 1 around it.

    Rectangles start at half-width max(0.1, 0.05 |lambda|); a rectangle is
    halved when it captures extra zeros and shrunk by 0.75 when the contour
    passes too close to a zero or refinement fails. All rectangles of a
    round are evaluated in one batch. Returns a boolean array.
    """
    lams = np.asarray(lams, dtype=complex)
    halves = np.maximum(0.1, 0.05 * np.abs(lams))
    certified = np.zeros(lams.size, dtype=bool)
    active = list(range(lams.size))
    for _ in range(max_shrink):
        if not active:
            break
        rects = [(lams[i].real - halves[i], lams[i].real + halves[i],
                  lams[i].imag - halves[i], lams[i].imag + halves[i])
                 for i in active]
        results = _winding_batch(prop, rects, per_side=8)
        still = []
        for i, res in zip(active, results):
            if isinstance(res, (ZeroOnContour, NoConvergence)):
                halves[i] *= 0.75
                still.append(i)
            elif res == 1:
                certified[i] = True
            elif res > 1:
                halves[i] /= 2.0
                still.append(i)
            # res <= 0: not a zero of the determinant; stays uncertified
        active = still
    return certified


def write_spectrum_csv(result, path):
    from .cli import atomic_write_table
    header = "re_lambda,im_lambda,residual,newton_iters,certified,seed_re,seed_im"
    rows = [[e.lam.real, e.lam.imag, e.residual, e.newton_iters,
             int(e.certified), e.seed.real, e.seed.imag]
            for e in result.eigenvalues]
    atomic_write_table(path, header, np.array(rows, dtype=float)
                       if rows else np.zeros((0, 7)))
