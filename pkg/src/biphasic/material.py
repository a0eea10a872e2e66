"""Material parameters, nondimensionalisation and the discrete spectra.

All quantities are SI. An incompressible solid matrix (``nu_s = 0.5``) is
represented by ``lambda_s = math.inf``; the gel diffusion time is then zero,
every spectral coefficient vanishes and the model is purely elastic.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from biphasic.charroots import Family, find_roots
from biphasic.errors import DomainError, SingularityError, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "BiphasicSpectrum",
    "DEFAULT_N_TERMS",
    "DerivedConstants",
    "MaterialParams",
    "build_spectrum",
    "coefficient_A",
    "coefficient_B",
    "derive_constants",
    "instantaneous_compliance",
    "instantaneous_modulus",
    "load_material",
    "nondimensionalize_force",
    "nondimensionalize_time",
    "spectrum_from_nu",
]

DEFAULT_N_TERMS = 200
MIN_DENOMINATOR = 1e-300


@dataclass(frozen=True)
class MaterialParams:
    """Solid-matrix Lame constants (Pa), permeability (m^4/(N s)) and geometry (m)."""

    mu_s: float
    lambda_s: float
    k_perm: float
    radius_a: float
    height_h: float

    def __post_init__(self):
        failures = []
        for name in ("mu_s", "k_perm", "radius_a", "height_h"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                failures.append(f"{name} must be a finite positive number, got {value!r}")
        lam = self.lambda_s
        if not isinstance(lam, (int, float)) or math.isnan(lam) or lam == -math.inf:
            failures.append(f"lambda_s must be a real number or +inf, got {lam!r}")
        elif self.mu_s > 0 and not lam > -2.0 * self.mu_s / 3.0:
            # nu_s > -1  <=>  lambda_s > -2 mu_s / 3
            failures.append(
                f"lambda_s must exceed -2*mu_s/3 = {-2.0 * self.mu_s / 3.0!r} "
                f"so that nu_s > -1, got {lam!r}"
            )
        if failures:
            raise ValidationError(failures)

    @classmethod
    def from_young(cls, E_s, nu_s, k_perm, radius_a, height_h):
        """Build from Young's modulus and Poisson's ratio of the solid matrix."""
        failures = []
        if not (math.isfinite(E_s) and E_s > 0):
            failures.append(f"E_s must be a finite positive number, got {E_s!r}")
        if not (-1.0 < nu_s <= 0.5):
            failures.append(f"nu_s must satisfy -1 < nu_s <= 0.5, got {nu_s!r}")
        if failures:
            raise ValidationError(failures)
        mu = E_s / (2.0 * (1.0 + nu_s))
        lam = math.inf if nu_s == 0.5 else 2.0 * mu * nu_s / (1.0 - 2.0 * nu_s)
        return cls(mu_s=mu, lambda_s=lam, k_perm=k_perm, radius_a=radius_a, height_h=height_h)

    @property
    def nu_s(self) -> float:
        return derive_constants(self).nu_s

    @property
    def H_A(self) -> float:
        return derive_constants(self).H_A

    @property
    def E_s(self) -> float:
        return derive_constants(self).E_s

    @property
    def t_g(self) -> float:
        return derive_constants(self).t_g

    @property
    def stiffness(self) -> float:
        """Elastic force per unit plate displacement, ``pi a^2 E_s / h`` (N/m)."""
        return math.pi * self.radius_a**2 * self.E_s / self.height_h

    def to_dict(self) -> dict:
        return {
            "mu_s_pa": self.mu_s,
            "lambda_s_pa": self.lambda_s,
            "k_perm": self.k_perm,
            "radius_m": self.radius_a,
            "height_m": self.height_h,
        }


class DerivedConstants(NamedTuple):
    nu_s: float
    H_A: float
    E_s: float
    t_g: float


def derive_constants(p: MaterialParams) -> DerivedConstants:
    """Poisson ratio, aggregate modulus, Young's modulus and gel diffusion time."""
    mu, lam = p.mu_s, p.lambda_s
    if math.isinf(lam):
        nu = 0.5
        H_A = math.inf
        t_g = 0.0
    else:
        nu = lam / (2.0 * (lam + mu))
        H_A = lam + 2.0 * mu
        t_g = p.radius_a**2 / (H_A * p.k_perm)
    E_s = 2.0 * mu * (1.0 + nu)
    return DerivedConstants(nu_s=nu, H_A=H_A, E_s=E_s, t_g=t_g)


def nondimensionalize_time(t: float, p: MaterialParams) -> float:
    """``t_hat = H_A k t / a^2``, i.e. time in units of the gel diffusion time."""
    t_g = derive_constants(p).t_g
    if t_g == 0.0:
        return 0.0 if t == 0 else math.copysign(math.inf, t)
    return t / t_g


def nondimensionalize_force(F: float, p: MaterialParams) -> float:
    """``F_hat = F / (pi a^2 mu_s)``."""
    return F / (math.pi * p.radius_a**2 * p.mu_s)


def instantaneous_modulus(nu_s: float) -> float:
    """K0 = K(0) = 3 / (2 (1 + nu_s))."""
    return 3.0 / (2.0 * (1.0 + nu_s))


def instantaneous_compliance(nu_s: float) -> float:
    """M0 = M(0) = 2 (1 + nu_s) / 3."""
    return 2.0 * (1.0 + nu_s) / 3.0


def _check_coeff_args(nu_s, root, name):
    if not (-1.0 < nu_s <= 0.5):
        raise DomainError(f"nu_s must satisfy -1 < nu_s <= 0.5, got {nu_s!r}")
    root = np.asarray(root, dtype=float)
    if np.any(~(root > 0)):
        raise DomainError(f"{name} roots must be positive")
    return root


def _guarded_ratio(num, den, name):
    den = np.asarray(den, dtype=float)
    if np.any(np.abs(den) < MIN_DENOMINATOR):
        raise SingularityError(f"{name}: denominator vanished (|d| < {MIN_DENOMINATOR:g})")
    out = num / den
    return out.item() if out.ndim == 0 else out


def coefficient_A(nu_s: float, alpha_n):
    """Relaxation-spectrum weight for root(s) ``alpha_n``."""
    alpha_n = _check_coeff_args(nu_s, alpha_n, "alpha")
    num = (1.0 - nu_s) * (1.0 - 2.0 * nu_s)
    den = (1.0 + nu_s) * ((1.0 - nu_s) ** 2 * alpha_n**2 - (1.0 - 2.0 * nu_s))
    return _guarded_ratio(num, den, "coefficient_A")


def coefficient_B(nu_s: float, beta_n):
    """Retardation-spectrum weight for root(s) ``beta_n``."""
    beta_n = _check_coeff_args(nu_s, beta_n, "beta")
    num = 4.0 * (1.0 - nu_s**2) * (1.0 - 2.0 * nu_s)
    den = 9.0 * (1.0 - nu_s) ** 2 * beta_n**2 - 8.0 * (1.0 + nu_s) * (1.0 - 2.0 * nu_s)
    return _guarded_ratio(num, den, "coefficient_B")


def _sum_tail_bound(num, a, b, n):
    """Upper bound for sum_{m>=n} num / (a m^2 - b), valid once a n^2 > b."""
    if num == 0.0:
        return 0.0
    if a * n * n <= b:
        return math.inf
    return num / (a - b / n**2) * (1.0 / n + 1.0 / n**2)


@dataclass(frozen=True, eq=False)
class BiphasicSpectrum:
    """Truncated relaxation and retardation spectra.

    ``rho``/``tau`` are in seconds when built from :class:`MaterialParams`
    (``t_g`` the gel diffusion time), or in units of ``t_g`` when ``t_g = 1``.
    ``sum_A_tail`` and ``sum_B_tail`` are analytic upper bounds on the
    omitted parts of ``sum A_n`` and ``sum B_n``; ``sum_A_remainder`` and
    ``sum_B_remainder`` are the omitted parts themselves, obtained from the
    closed-form sums ``K0 - 1`` and ``1 - M0``.
    """

    nu_s: float
    n_terms: int
    t_g: float
    alpha: np.ndarray
    beta: np.ndarray
    coeff_A: np.ndarray
    coeff_B: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    sum_A_tail: float
    sum_B_tail: float

    @property
    def K0(self) -> float:
        return instantaneous_modulus(self.nu_s)

    @property
    def M0(self) -> float:
        return instantaneous_compliance(self.nu_s)

    @property
    def sum_A_remainder(self) -> float:
        return self.K0 - 1.0 - math.fsum(self.coeff_A)

    @property
    def sum_B_remainder(self) -> float:
        return 1.0 - self.M0 - math.fsum(self.coeff_B)

    @property
    def coefficients_nonnegative(self) -> bool:
        return bool(np.all(self.coeff_A >= 0) and np.all(self.coeff_B >= 0))

    def with_terms(self, n_terms: int) -> "BiphasicSpectrum":
        """The same material with a different truncation."""
        if n_terms == self.n_terms:
            return self
        return spectrum_from_nu(self.nu_s, self.t_g, n_terms)


@lru_cache(maxsize=128)
def _spectrum_cached(nu_s: float, t_g: float, n_terms: int) -> BiphasicSpectrum:
    alpha = find_roots(Family.RELAXATION, nu_s, n_terms).roots
    beta = find_roots(Family.RETARDATION, nu_s, n_terms).roots
    if nu_s == 0.5:
        A = np.zeros(n_terms)
        B = np.zeros(n_terms)
    else:
        A = np.asarray(coefficient_A(nu_s, alpha), dtype=float).reshape(n_terms)
        B = np.asarray(coefficient_B(nu_s, beta), dtype=float).reshape(n_terms)
    rho = t_g / alpha**2
    tau = t_g / beta**2
    # alpha_n, beta_n > j1_{n-1} > (n-1) pi, so the omitted terms are
    # dominated by num / (a m^2 - b) summed over m >= n_terms
    tail_A = _sum_tail_bound(
        (1.0 - nu_s) * (1.0 - 2.0 * nu_s) / (1.0 + nu_s),
        (1.0 - nu_s) ** 2 * math.pi**2,
        1.0 - 2.0 * nu_s,
        n_terms,
    )
    tail_B = _sum_tail_bound(
        4.0 * (1.0 - nu_s**2) * (1.0 - 2.0 * nu_s),
        9.0 * (1.0 - nu_s) ** 2 * math.pi**2,
        8.0 * (1.0 + nu_s) * (1.0 - 2.0 * nu_s),
        n_terms,
    )
    for arr in (A, B, rho, tau):
        arr.flags.writeable = False
    spec = BiphasicSpectrum(
        nu_s=nu_s,
        n_terms=n_terms,
        t_g=t_g,
        alpha=alpha,
        beta=beta,
        coeff_A=A,
        coeff_B=B,
        rho=rho,
        tau=tau,
        sum_A_tail=tail_A,
        sum_B_tail=tail_B,
    )
    if 0.0 <= nu_s < 0.5 and not spec.coefficients_nonnegative:
        logger.warning("negative spectral coefficient for nu_s=%r (expected all >= 0)", nu_s)
    return spec


def spectrum_from_nu(nu_s: float, t_g: float = 1.0, n_terms: int = DEFAULT_N_TERMS) -> BiphasicSpectrum:
    """Spectrum for Poisson ratio ``nu_s`` and gel diffusion time ``t_g``.

    With the default ``t_g = 1`` the time constants are dimensionless.
    """
    nu_s = float(nu_s)
    if not (-1.0 < nu_s <= 0.5):
        raise DomainError(f"nu_s must satisfy -1 < nu_s <= 0.5, got {nu_s!r}")
    if not (math.isfinite(t_g) and t_g >= 0):
        raise DomainError(f"t_g must be finite and >= 0, got {t_g!r}")
    if int(n_terms) < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms!r}")
    return _spectrum_cached(nu_s, float(t_g), int(n_terms))


def build_spectrum(p: MaterialParams, n_terms: int = DEFAULT_N_TERMS) -> BiphasicSpectrum:
    """Roots, weights and time constants for material ``p``."""
    const = derive_constants(p)
    return spectrum_from_nu(const.nu_s, const.t_g, n_terms)


_KEYS_LAME = {"mu_s_pa", "lambda_s_pa"}
_KEYS_YOUNG = {"E_s_pa", "nu_s"}
_KEYS_COMMON = {"k_perm", "radius_m", "height_m"}


def material_from_dict(data: dict) -> MaterialParams:
    """Parse the JSON material record (Lame or Young/Poisson parameterisation)."""
    keys = set(data)
    failures = [f"missing field {k!r}" for k in sorted(_KEYS_COMMON - keys)]
    has_lame = bool(keys & _KEYS_LAME)
    has_young = bool(keys & _KEYS_YOUNG)
    if has_lame and has_young:
        failures.append("give either mu_s_pa/lambda_s_pa or E_s_pa/nu_s, not both")
    elif has_lame:
        failures += [f"missing field {k!r}" for k in sorted(_KEYS_LAME - keys)]
    elif has_young:
        failures += [f"missing field {k!r}" for k in sorted(_KEYS_YOUNG - keys)]
    else:
        failures.append("missing elastic constants: mu_s_pa/lambda_s_pa or E_s_pa/nu_s")
    unknown = keys - _KEYS_LAME - _KEYS_YOUNG - _KEYS_COMMON
    failures += [f"unknown field {k!r}" for k in sorted(unknown)]
    for k in keys - unknown:
        v = data[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            failures.append(f"field {k!r} must be a number, got {v!r}")
    if failures:
        raise ValidationError(failures)
    common = dict(k_perm=float(data["k_perm"]), radius_a=float(data["radius_m"]), height_h=float(data["height_m"]))
    if has_lame:
        return MaterialParams(mu_s=float(data["mu_s_pa"]), lambda_s=float(data["lambda_s_pa"]), **common)
    return MaterialParams.from_young(float(data["E_s_pa"]), float(data["nu_s"]), **common)


def load_material(path) -> MaterialParams:
    """Read a JSON material file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"{path}: invalid JSON ({exc})"]) from None
    if not isinstance(data, dict):
        raise ValidationError([f"{path}: expected a JSON object"])
    return material_from_dict(data)
