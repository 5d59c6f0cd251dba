"""Coefficient matrices of the linearized spectral problem.

Perturbations are x-periodic normal modes exp(lambda t + i omega x) of the
full system linearized about a BaseState. After reducing the two normal
stress components algebraically, the first-order form uses the 10-vector

    Y = (u, v, alpha12, Omega, Z, Z', L, L', M, M')

with Omega = P - Z_base * alpha22. Two variants of the reduction are
provided: 'exact_elimination' solves the exact 2x2 algebraic system for
(alpha11, alpha22) at each (y, lambda); 'truncated_3_2' keeps only the
leading large-|lambda| term (alpha11 ~ 2 alpha12_base/alpha2 * alpha12,
alpha22 ~ 0), which is the system whose asymptotics are evaluated in the
asymptotics module.

Every alpha-variable is the 1/Re-scaled stress perturbation; base-state
rheology blocks r33..r55 act in unscaled stress units and enter these rows
with the appropriate alpha2 divisors worked out once in CoeffField.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import ContinuousSpectrumPoint, DegenerateProfile

#: global state-vector ordering
LAYOUT = ("u", "v", "alpha12", "Omega", "Z", "Zp", "L", "Lp", "M", "Mp")
VARIANTS = ("exact_elimination", "truncated_3_2")

#: boundary rows: u, v, Z, L, M' vanish at both walls
BOUNDARY_INDICES = (0, 1, 4, 6, 9)
#: shooting basis directions: the complementary coordinates at y = -1/2
FREE_INDICES = (2, 3, 5, 7, 8)


def boundary_operator():
    """5x10 selection matrix of the wall conditions."""
    B = np.zeros((5, 10))
    for row, idx in enumerate(BOUNDARY_INDICES):
        B[row, idx] = 1.0
    return B


@dataclass
class CoeffField:
    """Base-state quantities sampled at a set of y points, prepared for
    assembling A(y; lambda, omega) at many lambda at once.

    All arrays have shape (n_points,). Stress blocks keep the unscaled
    (r**) and 1/Re-scaled (alpha*) conventions of the model module.
    """

    y: np.ndarray
    u: np.ndarray
    up: np.ndarray
    Z: np.ndarray
    Zp: np.ndarray
    L: np.ndarray
    Lp: np.ndarray
    a11h: np.ndarray      # alpha11_base = a11/Re
    a12h: np.ndarray
    a22h: np.ndarray
    a11hp: np.ndarray
    a12hp: np.ndarray
    a22hp: np.ndarray
    alpha1: np.ndarray    # a11/Re + kappa^2
    alpha2: np.ndarray
    rheo: "model.RheoCoeffs"
    F: np.ndarray         # thermal/magnetic forcing factor
    params: "model.ModelParams"

    @property
    def n(self):
        return self.y.size


def coeff_field(base, y, *, r44_variant="consistent"):
    """Sample a BaseState at points y and precompute shared factors."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    p = base.params
    s = base.sample(y)
    Z = s["Z"]
    if np.any(Z <= 0):
        raise DegenerateProfile("temperature non-positive at sample points")
    rheo = model.eval_rheo(p, Z, s["a11"], s["a12"], s["a22"],
                           r44_variant=r44_variant)
    lam1 = 1.0 + p.lambda_hat
    F = p.A_r * Z * s["a12"] + p.A_m * p.sigma_m * s["L"] * lam1
    return CoeffField(
        y=y, u=s["u"], up=s["u_prime"], Z=Z, Zp=s["Z_prime"], L=s["L"],
        Lp=s["L_prime"],
        a11h=s["a11"] / p.Re, a12h=s["a12"] / p.Re, a22h=s["a22"] / p.Re,
        a11hp=s["a11_prime"] / p.Re, a12hp=s["a12_prime"] / p.Re,
        a22hp=s["a22_prime"] / p.Re,
        alpha1=model.alpha_diag(p, s["a11"]), alpha2=model.alpha_diag(p, s["a22"]),
        rheo=rheo, F=F, params=p,
    )


def eliminate_alpha(field, lam, omega, *, det_floor=None):
    """Exact reduction of the two normal stress perturbations.

    Returns (alpha11_fn, alpha22_fn, det2x2) where each *_fn is an array of
    shape (..., 4): the complex coefficients on (u, v, alpha12, Z). Accepts
    lam of any shape broadcastable against field arrays (lam shape (...,)
    acting on n sample points gives output (..., n, 4)).

    Raises ContinuousSpectrumPoint when |det2x2| falls under the floor
    1e-10 * (1 + |lam|^2): such lam sit on (or next to) the algebraic
    singularity set of the reduction and cannot be discrete eigenvalues.
    """
    lam = np.asarray(lam, dtype=complex)
    scalar_lam = lam.ndim == 0
    lam = lam[..., None]  # broadcast over sample points
    r = field.rheo
    p = field.params
    adv = lam + 1j * omega * field.u

    m11 = adv + r.r33 - 2.0 * field.a12h * r.r43 / field.alpha2
    r45_full = -field.up + r.r45_stress
    m12 = -(2.0 * field.a12h * r45_full / field.alpha2 - r.r35)
    m21 = r.r53 + 0.0 * adv
    m22 = adv + r.r55
    det = m11 * m22 - m12 * m21

    floor = det_floor if det_floor is not None else 1e-10 * (1.0 + np.abs(lam) ** 2)
    if np.any(np.abs(det) < floor):
        raise ContinuousSpectrumPoint(
            "normal-stress reduction singular: |det| below floor"
        )

    r34_full = -2.0 * field.up + r.r34_stress
    c_v = (field.a12hp - 1j * omega * field.alpha1) / field.alpha2
    # right-hand sides as coefficient rows over (u, v, alpha12, Z)
    shape = np.broadcast_shapes(adv.shape, field.y.shape)
    rhs1 = np.zeros(shape + (4,), dtype=complex)
    rhs2 = np.zeros(shape + (4,), dtype=complex)
    rhs1[..., 0] = 2.0 * field.alpha1 * 1j * omega
    rhs1[..., 1] = 2.0 * field.a12h * c_v - field.a11hp
    rhs1[..., 2] = 2.0 * field.a12h * (adv + r.r44) / field.alpha2 - r34_full
    rhs1[..., 3] = 2.0 * field.a12h * r.r12 / field.alpha2 - r.r11
    rhs2[..., 0] = -2.0 * field.alpha2 * 1j * omega
    rhs2[..., 1] = 2.0 * field.a12h * 1j * omega - field.a22hp
    rhs2[..., 2] = -r.r54

    det_e = det[..., None]
    a11_fn = (m22[..., None] * rhs1 - m12[..., None] * rhs2) / det_e
    a22_fn = (m11[..., None] * rhs2 - m21[..., None] * rhs1) / det_e
    if scalar_lam:
        a11_fn, a22_fn, det = a11_fn[0], a22_fn[0], det[0]
    return a11_fn, a22_fn, det


def elimination_scaffold(field, omega):
    """Lambda-free data of the exact reduction, packed for interpolation.

    Returns a complex array of shape (n, 13) with columns
    (q11, m12, m21, q22, rhs1[0..3], rhs1_adv, rhs2[0..2], u) such that
    e_rows_from_scaffold reproduces eliminate_alpha at any lambda. Used by
    the spectrum propagator to avoid re-deriving rheology per step.
    """
    r = field.rheo
    n = field.n
    out = np.zeros((n, 13), dtype=complex)
    r45_full = -field.up + r.r45_stress
    r34_full = -2.0 * field.up + r.r34_stress
    c_v = (field.a12hp - 1j * omega * field.alpha1) / field.alpha2
    out[:, 0] = r.r33 - 2.0 * field.a12h * r.r43 / field.alpha2
    out[:, 1] = -(2.0 * field.a12h * r45_full / field.alpha2 - r.r35)
    out[:, 2] = r.r53
    out[:, 3] = r.r55
    out[:, 4] = 2.0 * field.alpha1 * 1j * omega
    out[:, 5] = 2.0 * field.a12h * c_v - field.a11hp
    out[:, 6] = 2.0 * field.a12h * r.r44 / field.alpha2 - r34_full
    out[:, 7] = 2.0 * field.a12h * r.r12 / field.alpha2 - r.r11
    out[:, 8] = 2.0 * field.a12h / field.alpha2
    out[:, 9] = -2.0 * field.alpha2 * 1j * omega
    out[:, 10] = 2.0 * field.a12h * 1j * omega - field.a22hp
    out[:, 11] = -r.r54
    out[:, 12] = field.u
    return out


def e_rows_from_scaffold(scaf, lams, omega, *, det_floor=None):
    """Exact-elimination functionals at a single point from packed data.

    scaf has shape (13,); lams shape (m,). Returns (e11, e22) of shape
    (m, 4), raising ContinuousSpectrumPoint when the 2x2 determinant falls
    below the floor (same convention as eliminate_alpha).
    """
    adv = lams + 1j * omega * scaf[12]
    m11 = adv + scaf[0]
    m22 = adv + scaf[3]
    det = m11 * m22 - scaf[1] * scaf[2]
    floor = det_floor if det_floor is not None \
        else 1e-10 * (1.0 + np.abs(lams) ** 2)
    if np.any(np.abs(det) < floor):
        raise ContinuousSpectrumPoint(
            "normal-stress reduction singular: |det| below floor"
        )
    m = lams.size
    rhs1 = np.tile(scaf[4:8], (m, 1))
    rhs1[:, 2] += scaf[8] * adv
    rhs2 = np.zeros((m, 4), dtype=complex)
    rhs2[:, :3] = scaf[9:12]
    det_e = det[:, None]
    e11 = (m22[:, None] * rhs1 - scaf[1] * rhs2) / det_e
    e22 = (m11[:, None] * rhs2 - scaf[2] * rhs1) / det_e
    return e11, e22


def det2x2(field, lam, omega):
    """Determinant of the normal-stress reduction, without the floor check."""
    lam = np.asarray(lam, dtype=complex)[..., None]
    r = field.rheo
    adv = lam + 1j * omega * field.u
    m11 = adv + r.r33 - 2.0 * field.a12h * r.r43 / field.alpha2
    r45_full = -field.up + r.r45_stress
    m12 = -(2.0 * field.a12h * r45_full / field.alpha2 - r.r35)
    m22 = adv + r.r55
    return m11 * m22 - m12 * r.r53


def assemble_parts(field, omega):
    """Lambda-independent building blocks of A(y; lambda, omega).

    Returns (D, P, g11, g22): A(lambda) = lambda*D + P + rank-one updates
    g11 (x) e11(lambda) + g22 (x) e22(lambda), where the e-rows act on the
    coordinates (u, v, alpha12, Z) (indices 0, 1, 2, 4). Shapes: D and P
    are (n, 10, 10), g-rows (n, 10).
    """
    n = field.n
    p = field.params
    r = field.rheo
    P = np.zeros((n, 10, 10), dtype=complex)

    adv0 = 1j * omega * field.u    # advective part; lambda rides on D
    iw = 1j * omega
    alpha2 = field.alpha2
    c_v = (field.a12hp - iw * field.alpha1) / alpha2
    r45_full = -field.up + r.r45_stress
    lam1 = 1.0 + p.lambda_hat
    F = field.F

    # row 0: u'
    P[:, 0, 1] = c_v
    P[:, 0, 2] = (adv0 + r.r44) / alpha2
    P[:, 0, 4] = r.r12 / alpha2
    # row 1: v'
    P[:, 1, 0] = -iw
    # row 2: alpha12'
    P[:, 2, 0] = adv0 / field.Z
    P[:, 2, 1] = field.up / field.Z
    P[:, 2, 2] = -field.Zp / field.Z
    P[:, 2, 3] = iw / field.Z
    P[:, 2, 4] = -(iw * field.a11h + field.a12hp) / field.Z
    P[:, 2, 5] = -field.a12h / field.Z
    P[:, 2, 7] = -p.sigma_m * lam1 / field.Z
    P[:, 2, 8] = (p.sigma_m * lam1 * iw - p.sigma_m * field.Lp) / field.Z
    # row 3: Omega'
    P[:, 3, 1] = -adv0
    P[:, 3, 2] = iw * field.Z
    P[:, 3, 4] = iw * field.a12h + field.a22hp + p.Gr
    P[:, 3, 5] = field.a22h
    P[:, 3, 6] = -p.sigma_m * field.Lp
    P[:, 3, 7] = -p.sigma_m * field.L
    P[:, 3, 8] = iw * p.sigma_m * field.L
    # row 4: Z' chain
    P[:, 4, 5] = 1.0
    # row 5: Z''
    P[:, 5, 0] = -iw * (p.A_r * field.Z * (field.a11h - field.a22h) * p.Re
                        + p.A_m * p.sigma_m * (field.L ** 2 - lam1 ** 2))
    P[:, 5, 1] = p.Pr * field.Zp - F * (iw + c_v)
    P[:, 5, 2] = -F * (adv0 + r.r44) / alpha2 - p.A_r * field.Z * p.Re * field.up
    P[:, 5, 4] = (p.Pr * adv0 + omega ** 2
                  - p.A_r * field.up * field.a12h * p.Re - F * r.r12 / alpha2)
    P[:, 5, 6] = -p.A_m * p.sigma_m * lam1 * field.up
    P[:, 5, 8] = -p.A_m * p.sigma_m * field.L * field.up
    # row 6: L' chain
    P[:, 6, 7] = 1.0
    # row 7: L''
    P[:, 7, 0] = -iw * field.L / p.b_m
    P[:, 7, 1] = (field.Lp - lam1 * c_v) / p.b_m
    P[:, 7, 2] = -lam1 * (adv0 + r.r44) / (p.b_m * alpha2)
    P[:, 7, 4] = -lam1 * r.r12 / (p.b_m * alpha2)
    P[:, 7, 6] = adv0 / p.b_m + omega ** 2
    P[:, 7, 8] = -field.up / p.b_m
    # row 8: M' chain
    P[:, 8, 9] = 1.0
    # row 9: M''
    P[:, 9, 0] = lam1 * iw / p.b_m
    P[:, 9, 1] = -iw * field.L / p.b_m
    P[:, 9, 8] = adv0 / p.b_m + omega ** 2

    # normal-stress contribution rows
    g11 = np.zeros((n, 10), dtype=complex)
    g11[:, 0] = r.r43 / alpha2
    g11[:, 2] = -iw
    g11[:, 5] = -F * r.r43 / alpha2
    g11[:, 7] = -lam1 * r.r43 / (p.b_m * alpha2)
    g22 = np.zeros((n, 10), dtype=complex)
    g22[:, 0] = r45_full / alpha2
    g22[:, 2] = iw
    g22[:, 5] = -F * r45_full / alpha2
    g22[:, 7] = -lam1 * r45_full / (p.b_m * alpha2)

    return sparse_D(field), P, g11, g22


def truncated_e_rows(field):
    """Leading-order elimination functionals of the truncated variant."""
    n = field.n
    e11 = np.zeros((n, 4), dtype=complex)
    e11[:, 2] = 2.0 * field.a12h / field.alpha2
    e22 = np.zeros((n, 4), dtype=complex)
    return e11, e22


def coeff_matrix(field, lam, omega, variant="exact_elimination"):
    """Assemble A(y; lambda, omega) with Y' = A Y.

    field holds samples at n points; lam may be scalar or shape (m,).
    Returns an array of shape (m, n, 10, 10) (squeezed for scalar inputs).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    lam_in = np.asarray(lam, dtype=complex)
    lam = np.atleast_1d(lam_in)
    n = field.n
    m = lam.size

    D, P, g11, g22 = assemble_parts(field, omega)
    A = lam[:, None, None, None] * D[None] + P[None]

    if variant == "truncated_3_2":
        e11, e22 = truncated_e_rows(field)
        e11 = np.broadcast_to(e11, (m, n, 4))
        e22 = np.broadcast_to(e22, (m, n, 4))
    else:
        e11, e22, _ = eliminate_alpha(field, lam, omega)

    for j, col in enumerate((0, 1, 2, 4)):
        A[..., :, col] += g11 * e11[..., j][..., None] \
            + g22 * e22[..., j][..., None]

    if lam_in.ndim == 0:
        A = A[0]
        if n == 1:
            A = A[0]
    return A


def sparse_D(field):
    """Leading matrix D of the truncated system A = lambda D + P.

    Shape (n, 10, 10); exactly 8 nonzero entries per point.
    """
    n = field.n
    p = field.params
    D = np.zeros((n, 10, 10))
    D[:, 0, 2] = 1.0 / field.alpha2
    D[:, 2, 0] = 1.0 / field.Z
    D[:, 3, 1] = -1.0
    D[:, 5, 2] = -field.F / field.alpha2
    D[:, 5, 4] = p.Pr
    D[:, 7, 2] = -(1.0 + p.lambda_hat) / (p.b_m * field.alpha2)
    D[:, 7, 6] = 1.0 / p.b_m
    D[:, 9, 8] = 1.0 / p.b_m
    return D


def transform_T(field):
    """Pointwise change of basis bringing D to upper Jordan form.

    Returns (T, W) with shapes (n, 10, 10): T^{-1} D T = W, where W has
    diagonal entries -1/sqrt(Z alpha2), +1/sqrt(Z alpha2) in the first two
    slots followed by four nilpotent 2x2 blocks. Raises DegenerateProfile
    if Z * alpha2 is not positive.
    """
    n = field.n
    p = field.params
    prod = field.Z * field.alpha2
    if np.any(prod <= 0):
        raise DegenerateProfile("Z * alpha2 non-positive; transform undefined")
    s = np.sqrt(field.Z / field.alpha2)
    lam1 = 1.0 + p.lambda_hat

    T = np.zeros((n, 10, 10))
    T[:, 0, 0], T[:, 0, 1] = -s, s
    T[:, 2, 0] = T[:, 2, 1] = 1.0
    T[:, 5, 0], T[:, 5, 1] = field.F * s, -field.F * s
    T[:, 7, 0], T[:, 7, 1] = lam1 * s / p.b_m, -lam1 * s / p.b_m
    T[:, 3, 2] = 1.0
    T[:, 1, 3] = -1.0
    T[:, 5, 4] = 1.0
    T[:, 4, 5] = 1.0 / p.Pr
    T[:, 7, 6] = 1.0
    T[:, 6, 7] = p.b_m
    T[:, 9, 8] = 1.0
    T[:, 8, 9] = p.b_m

    W = np.zeros((n, 10, 10))
    rate = 1.0 / np.sqrt(prod)
    W[:, 0, 0], W[:, 1, 1] = -rate, rate
    for j in (2, 4, 6, 8):
        W[:, j, j + 1] = 1.0
    return T, W


def c_diag(field, omega):
    """Diagonal entries c11, c22 of the transformed zeroth-order matrix.

    In the transformed frame the truncated system reads
    (T^{-1} Y)' = (lambda W + C) (T^{-1} Y) + ..., C = T^{-1}(P T - T').
    Only the two entries on the growing/decaying directions drive the
    leading asymptotics; they are returned as arrays over the field points.
    The derivative term reduces to s'/(2s), evaluated from stored profile
    derivatives.
    """
    p = field.params
    s = np.sqrt(field.Z / field.alpha2)
    lam1 = 1.0 + p.lambda_hat
    P = coeff_matrix(field, 0.0 + 0.0j, omega, "truncated_3_2")
    P = P.reshape(field.n, 10, 10)

    t1 = np.zeros((field.n, 10), dtype=complex)
    t1[:, 0], t1[:, 2] = -s, 1.0
    t1[:, 5] = field.F * s
    t1[:, 7] = lam1 * s / p.b_m
    t2 = t1.copy()
    t2[:, 0] = s
    t2[:, 5] = -field.F * s
    t2[:, 7] = -lam1 * s / p.b_m

    Pt1 = np.einsum("nij,nj->ni", P, t1)
    Pt2 = np.einsum("nij,nj->ni", P, t2)
    # w1 = (-1/(2s), 0, 1/2, 0, ...), w2 = (+1/(2s), 0, 1/2, 0, ...)
    ds_over_2s = (field.Zp / field.Z - field.a22hp / field.alpha2) / 4.0
    c11 = -Pt1[:, 0] / (2.0 * s) + Pt1[:, 2] / 2.0 - ds_over_2s
    c22 = Pt2[:, 0] / (2.0 * s) + Pt2[:, 2] / 2.0 - ds_over_2s
    return c11, c22
