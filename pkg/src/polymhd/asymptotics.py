"""High-mode eigenvalue asymptotics and the necessary stability criterion.

For mode number k -> infinity the eigenvalues approach

    lambda_k = (drift + k pi i) / mu,   mu = int dy / sqrt(Z alpha2),

where drift is a channel integral over the base profiles. The real part of
drift is -S/2, with S the stability criterion integral: the flow can only
be asymptotically stable if S > 0 (equivalently, the limiting eigenvalue
line Re lambda = Re(drift)/mu lies in the left half-plane).

Two independent evaluations of the drift are provided: the closed-form
integrand (stability_criterion/asymptotic_lambda) and the diagonal entries
of the transformed system integrated as amplitude factors
(amplitude_factors); the test suite requires them to agree.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import linearized
from .errors import DegenerateProfile, PairingAmbiguous
from .numerics import quad_adaptive


@dataclass(frozen=True)
class AsymptoticReport:
    mu: float
    drift: complex
    re_lambda_inf: float
    im_spacing: float
    criterion_S: float
    necessary_condition_met: bool

    def to_json_dict(self):
        return {
            "mu": self.mu,
            "drift_re": self.drift.real,
            "drift_im": self.drift.imag,
            "re_lambda_inf": self.re_lambda_inf,
            "im_spacing": self.im_spacing,
            "criterion_S": self.criterion_S,
            "necessary_condition_met": self.necessary_condition_met,
        }


@dataclass(frozen=True)
class VerificationRow:
    k: int
    lambda_num: complex
    lambda_asym: complex
    err: float
    err_times_k: float


@dataclass(frozen=True)
class VerificationTable:
    rows: tuple
    omega: float
    bounded: bool          # mean err*k, upper vs lower half of the k range


def _node_quad(base, values):
    """Clenshaw-Curtis sum of nodal values over the base grid."""
    return np.sum(base.grid.quad_weights() * values)


def _drift_integrand_nodes(base, omega):
    field = linearized.coeff_field(base, base.grid.nodes)
    p = base.params
    r = field.rheo
    prod = field.Z * field.alpha2
    if np.any(prod <= 0):
        raise DegenerateProfile("Z * alpha2 non-positive in drift integrand")
    root_ratio = np.sqrt(field.alpha2 / field.Z)
    inv_root = 1.0 / np.sqrt(prod)
    lam1 = 1.0 + p.lambda_hat
    return -(0.5) * (
        root_ratio * ((1j * omega * field.u + r.r44) / field.alpha2
                      + 2.0 * field.a12h * r.r43 / field.alpha2 ** 2)
        + 1j * omega * field.u * inv_root
        + (field.a12h / field.Z) * field.F / root_ratio
        + p.sigma_m * lam1 ** 2 / p.b_m * inv_root
    )


def travel_time(base):
    """mu: integral of the inverse local propagation speed."""
    s = base.sample(base.grid.nodes, names=("Z", "a22"))
    alpha2 = s["a22"] / base.params.Re + base.params.kappa2
    prod = s["Z"] * alpha2
    if np.any(prod <= 0):
        raise DegenerateProfile("Z * alpha2 non-positive in mu integrand")
    return float(_node_quad(base, 1.0 / np.sqrt(prod)))


def drift_integral(base, omega):
    """Closed-form drift integrand summed over the base grid."""
    return complex(_node_quad(base, _drift_integrand_nodes(base, omega)))


def drift_from_diagonals(base, omega):
    """Drift recovered from the transformed-system diagonal route.

    Integrates (c11 - c22)/2 over the channel; must agree with
    drift_integral, which uses the independently coded closed form.
    """
    field = linearized.coeff_field(base, base.grid.nodes)
    c11, c22 = linearized.c_diag(field, omega)
    return complex(_node_quad(base, (c11 - c22) / 2.0))


def asymptotic_lambda(base, omega, k):
    """k-th asymptotic eigenvalue (k >= 1)."""
    if k < 1:
        raise ValueError("mode index k must be >= 1")
    return (drift_integral(base, omega) + 1j * np.pi * k) / travel_time(base)


def stability_criterion(base, *, omega=None):
    """Evaluate the necessary-stability integral S and the report fields.

    S is integrated from its own closed-form integrand (not recycled from
    the drift), so the identity re_lambda_inf = -S/(2 mu) is a genuine
    cross-check of the two evaluations.
    """
    p = base.params
    if omega is None:
        omega = p.omega
    lam1 = 1.0 + p.lambda_hat

    field = linearized.coeff_field(base, base.grid.nodes)
    r = field.rheo
    prod = field.Z * field.alpha2
    if np.any(prod <= 0):
        raise DegenerateProfile("Z * alpha2 non-positive in criterion")
    root_ratio = np.sqrt(field.alpha2 / field.Z)
    inv_root = 1.0 / np.sqrt(prod)
    integrand = (root_ratio * (r.r44 / field.alpha2
                               + 2.0 * field.a12h * r.r43 / field.alpha2 ** 2)
                 + (field.a12h / field.Z) * field.F / root_ratio
                 + p.sigma_m * lam1 ** 2 / p.b_m * inv_root)
    S = float(np.real(_node_quad(base, integrand)))
    mu = travel_time(base)
    drift = drift_integral(base, omega)
    return AsymptoticReport(
        mu=mu, drift=drift, re_lambda_inf=drift.real / mu,
        im_spacing=np.pi / mu, criterion_S=S,
        necessary_condition_met=S > 0.0,
    )


def amplitude_factors(base, omega, *, tol=1e-12):
    """Amplitude profiles of the two propagating directions.

    Returns (log_p1, log_p2) as callables of y giving the integrals of the
    transformed diagonal coefficients from the bottom wall (p_i(-1/2) = 1,
    p_i = exp(log_p_i)).
    """
    def c_fn(y, which):
        field = linearized.coeff_field(base, np.atleast_1d(y))
        c11, c22 = linearized.c_diag(field, omega)
        return c11 if which == 0 else c22

    def log_p(y, which):
        if y == -0.5:
            return 0.0 + 0.0j
        val, _ = quad_adaptive(lambda t: c_fn(t, which), -0.5, y, tol=tol)
        return complex(val)

    return (lambda y: log_p(y, 0)), (lambda y: log_p(y, 1))


def lambda_from_amplitudes(base, omega, k, *, tol=1e-12):
    """Eigenvalue estimate from the boundary amplitude-ratio identity.

    Solves exp(2 lambda mu) = p1(1/2)/p2(1/2) for the branch with
    Im lambda in the k-th window; cross-validates asymptotic_lambda.
    """
    log_p1, log_p2 = amplitude_factors(base, omega, tol=tol)
    mu = travel_time(base)
    ratio_log = log_p1(0.5) - log_p2(0.5)
    lam = (ratio_log + 2j * np.pi * k) / (2.0 * mu)
    # fold into the principal spacing window used by asymptotic_lambda
    return lam


def verify_spectrum(base, omega, k_range, cfg=None, *, variant=None,
                    pad=None):
    """Numerical vs asymptotic eigenvalues over a mode range.

    k_range is (k_min, k_max) inclusive. Seeds come from asymptotic_lambda;
    roots are paired back to seeds by proximity. Raises PairingAmbiguous if
    two numerical roots claim the same seed. The boundedness flag compares
    the mean of err*k over the upper half of the mode range against the
    lower half: the remainder alternates in sign between adjacent modes, so
    a mean ratio is used instead of a max/min ratio, which the alternation
    would trip even when err*k is flat.
    """
    from . import spectrum as spec

    if cfg is None:
        cfg = spec.IntegratorConfig()
    if variant is not None:
        cfg = spec.IntegratorConfig(rtol=cfg.rtol, atol=cfg.atol,
                                    renorm_threshold=cfg.renorm_threshold,
                                    max_steps=cfg.max_steps, variant=variant)
    k_min, k_max = int(k_range[0]), int(k_range[1])
    ks = np.arange(k_min, k_max + 1)
    mu = travel_time(base)
    drift = drift_integral(base, omega)
    seeds = (drift + 1j * np.pi * ks) / mu

    spacing = np.pi / mu
    if pad is None:
        pad = 0.45 * spacing
    region = (min(s.real for s in seeds) - 2.0,
              max(s.real for s in seeds) + 2.0,
              seeds[0].imag - pad, seeds[-1].imag + pad)
    result = spec.find_eigenvalues(base, omega, region, seeds, cfg)

    roots = np.array([e.lam for e in result.eigenvalues])
    rows = []
    claimed = {}
    for k, seed in zip(ks, seeds):
        if roots.size == 0:
            raise PairingAmbiguous("no numerical roots to pair")
        j = int(np.argmin(np.abs(roots - seed)))
        if j in claimed:
            raise PairingAmbiguous(
                f"modes k={claimed[j]} and k={k} claim the same root")
        claimed[j] = int(k)
        err = abs(roots[j] - seed)
        rows.append(VerificationRow(k=int(k), lambda_num=complex(roots[j]),
                                    lambda_asym=complex(seed), err=float(err),
                                    err_times_k=float(err * k)))

    mid = (k_min + k_max) / 2
    upper = [r.err_times_k for r in rows if r.k >= mid]
    lower = [r.err_times_k for r in rows if r.k < mid]
    if upper and lower:
        bounded = bool(np.mean(upper) <= 1.5 * np.mean(lower))
    else:
        bounded = True
    return VerificationTable(rows=tuple(rows), omega=omega, bounded=bounded), result


def write_asymptotics_json(report, path):
    from .cli import atomic_write_text
    payload = report.to_json_dict()
    parts = []
    for k, v in payload.items():
        if isinstance(v, bool):
            rendered = "true" if v else "false"
        elif isinstance(v, float):
            rendered = format(v, ".17g")
        else:
            rendered = json.dumps(v)
        parts.append(f'  "{k}": {rendered}')
    atomic_write_text(path, "{\n" + ",\n".join(parts) + "\n}\n")


def write_verify_csv(table, path):
    from .cli import atomic_write_table
    header = "k,re_num,im_num,re_asym,im_asym,err,err_times_k"
    rows = [[r.k, r.lambda_num.real, r.lambda_num.imag, r.lambda_asym.real,
             r.lambda_asym.imag, r.err, r.err_times_k] for r in table.rows]
    atomic_write_table(path, header, np.array(rows, dtype=float)
                       if rows else np.zeros((0, 7)))
