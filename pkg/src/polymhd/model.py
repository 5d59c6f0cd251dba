"""Physical parameters and rheology coefficients.

The fluid is an incompressible polymeric melt in a plane channel under a
longitudinal pressure gradient, Joule heating and a transverse magnetic
field. The constitutive model couples the anisotropy (conformation) tensor
a_ij to the strain rate through a temperature-dependent relaxation kernel;
this module evaluates that kernel and the coefficient blocks that appear
both in the stationary problem and in the linearization.
"""

from dataclasses import dataclass, replace

import numpy as np

#: Config keys accepted by the CLI and their ModelParams attributes.
PARAM_KEYS = (
    "Re", "W", "Gr", "Pr", "A_r", "A_m", "sigma_m", "b_m", "E_A", "beta",
    "k", "A_hat", "theta_bar", "J_plus", "J_minus", "lambda_hat", "omega",
)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless problem parameters.

    Re, W      Reynolds and Weissenberg numbers (both > 0)
    Gr, Pr     Grashof and Prandtl numbers
    A_r, A_m   dissipative heating and magnetic heating amplitudes
    sigma_m    conductivity ratio
    b_m        magnetic diffusivity ratio (> 0)
    E_A        activation energy of the relaxation kernel
    beta       anisotropic drag parameter, 0 < beta < 1
    k          phenomenological closure constant
    A_hat      imposed pressure-gradient amplitude
    theta_bar  wall temperature offset
    J_plus, J_minus   wall values of the induced magnetic potential
    lambda_hat electric field loading parameter
    omega      streamwise wavenumber of the perturbation
    """

    Re: float = 1.0
    W: float = 1.0
    Gr: float = 1.0
    Pr: float = 1.0
    A_r: float = 1.0
    A_m: float = 1.0
    sigma_m: float = 1.0
    b_m: float = 1.0
    E_A: float = 1.0
    beta: float = 0.5
    k: float = 1.0
    A_hat: float = 1.0
    theta_bar: float = 1.0
    J_plus: float = 2.0
    J_minus: float = 1.0
    lambda_hat: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if self.Re <= 0 or self.W <= 0:
            raise ValueError("Re and W must be positive")
        if self.b_m <= 0:
            raise ValueError("b_m must be positive")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.Pr <= 0:
            raise ValueError("Pr must be positive")

    @property
    def kappa2(self):
        """Retardation viscosity ratio 1/(W Re)."""
        return 1.0 / (self.W * self.Re)

    @property
    def k_bar(self):
        return self.k - self.beta

    @property
    def grad_amp(self):
        """Pressure gradient in channel units, Re * A_hat."""
        return self.Re * self.A_hat

    def with_(self, **kw):
        return replace(self, **kw)


def params_from_dict(d):
    """Build ModelParams from a plain dict; unknown keys are an error."""
    unknown = set(d) - set(PARAM_KEYS)
    if unknown:
        raise KeyError(f"unknown parameter keys: {sorted(unknown)}")
    vals = {}
    for key, val in d.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise TypeError(f"parameter {key!r} must be a number, got {val!r}")
        vals[key] = float(val)
    return ModelParams(**vals)


def eval_J(params, Z):
    """Arrhenius-type mobility factor J(Z) = exp(E_A (Z-1)/Z), Z > 0."""
    Z = np.asarray(Z, dtype=float)
    if np.any(Z <= 0):
        raise ValueError("temperature must stay positive")
    return np.exp(params.E_A * (Z - 1.0) / Z)


def relax_inverse(params, trace_a):
    """Relaxation coefficient K(I) = 1/W + (k - beta)/3 * I, I = tr(a)."""
    return 1.0 / params.W + params.k_bar / 3.0 * trace_a


def relax_inverse_tilde(params, trace_a):
    """Shifted coefficient K~(I) = K(I) + beta I = 1/W + (k+2 beta)/3 * I."""
    return 1.0 / params.W + (params.k + 2.0 * params.beta) / 3.0 * trace_a


@dataclass(frozen=True)
class RheoCoeffs:
    """Linearized relaxation block evaluated on a base profile.

    All fields are arrays over y (or scalars off a single point). The
    convention: chi0 = Z J(Z) multiplies every stress relaxation row;
    stress_* entries are the constitutive parts only (advection terms
    -u' and -2u' are added where the full rows are assembled).

    r44 follows the dissipation-consistent reading chi0 * K~ by default;
    construct with r44_variant='literal' for chi0' * K~ instead.
    """

    chi0: np.ndarray
    chi0_prime: np.ndarray   # d(chi0)/dZ = chi0 (E_A + Z)/Z^2
    r33: np.ndarray
    r35: np.ndarray
    r53: np.ndarray
    r55: np.ndarray
    r43: np.ndarray
    r45_stress: np.ndarray
    r34_stress: np.ndarray
    r54: np.ndarray
    r44: np.ndarray
    r11: np.ndarray          # temperature coupling into the normal-stress rows
    r12: np.ndarray


def eval_rheo(params, Z, a11, a12, a22, *, r44_variant="consistent"):
    """Evaluate the linearized relaxation coefficients on a base profile.

    Z, a11, a12, a22 are base-state fields (arrays or scalars). Returns a
    RheoCoeffs. Variable ordering of the stress block the coefficients act
    on is (a11, a12, a22) with the trace I = a11 + a22.
    """
    if r44_variant not in ("consistent", "literal"):
        raise ValueError(f"unknown r44_variant {r44_variant!r}")
    Z = np.asarray(Z, dtype=float)
    a11 = np.asarray(a11, dtype=float)
    a12 = np.asarray(a12, dtype=float)
    a22 = np.asarray(a22, dtype=float)
    trace = a11 + a22
    J = eval_J(params, Z)
    chi0 = Z * J
    chi0p = chi0 * (params.E_A + Z) / Z**2
    K = relax_inverse(params, trace)
    Kt = relax_inverse_tilde(params, trace)
    kb3 = params.k_bar / 3.0
    beta = params.beta

    r33 = chi0 * (K + a11 * (kb3 + 2.0 * beta))
    r55 = chi0 * (K + a22 * (kb3 + 2.0 * beta))
    r35 = chi0 * kb3 * a11
    r53 = chi0 * kb3 * a22
    r43 = a12 * chi0 * (kb3 + beta)
    r45_stress = a12 * chi0 * (kb3 + beta)
    r34_stress = 2.0 * beta * a12 * chi0
    r54 = 2.0 * beta * a12 * chi0
    r44 = (chi0 if r44_variant == "consistent" else chi0p) * Kt

    # the temperature couplings act on viscous-scaled (1/Re) perturbation
    # stresses, so they carry alpha-hat base factors
    a12h = a12 / params.Re
    alpha2 = a22 / params.Re + params.kappa2
    r11 = chi0p * 2.0 * a12h**2 * Kt / alpha2
    r12 = chi0p * a12h * Kt

    return RheoCoeffs(
        chi0=chi0, chi0_prime=chi0p, r33=r33, r35=r35, r53=r53, r55=r55,
        r43=r43, r45_stress=r45_stress, r34_stress=r34_stress, r54=r54,
        r44=r44, r11=r11, r12=r12,
    )


def alpha_hat(params, a_field):
    """Viscous-scaled stress alpha_ij = a_ij / Re; diagonal entries get the
    retardation shift kappa^2 when requested via alpha_diag."""
    return np.asarray(a_field, dtype=float) / params.Re


def alpha_diag(params, a_diag):
    """alpha_i = a_ii/Re + 1/(W Re), the total diagonal viscosity factor."""
    return np.asarray(a_diag, dtype=float) / params.Re + params.kappa2
