"""Apparent storage/loss moduli and compliances, loss angle, incomplete moduli.

Every quantity is dimensionless (relative to ``E_s`` or ``1/E_s``) and is a
sum over a truncated spectrum. Each evaluator also returns a rigorous bound
on the contribution of the omitted terms, derived from the monotonicity of
the summand in ``omega * rho_n`` and the analytic bound on ``sum A_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from biphasic.charroots import MAX_ROOTS
from biphasic.errors import DomainError, OracleFailure
from biphasic.kernels import prony_K, prony_M
from biphasic.material import BiphasicSpectrum, MaterialParams, derive_constants

__all__ = [
    "ModuliEval",
    "evaluate",
    "frequency_grid",
    "highfreq_asymptote_K_tilde",
    "incomplete_storage_K",
    "incomplete_storage_M",
    "incomplete_quadrature",
    "loss_angle",
    "sqrt_sine_integral",
    "storage_gap_K",
    "storage_loss_K",
    "storage_loss_M",
    "terms_for_frequency",
]


@dataclass(frozen=True)
class ModuliEval:
    omega: float
    K1: float
    K2: float
    M1: float
    M2: float
    K1_tilde: float
    M1_tilde: float
    loss_angle: float
    tail_bound: float
    n_terms: int

    @property
    def tan_delta(self) -> float:
        return self.K2 / self.K1


def _check_omega(omega, strict=False):
    omega = float(omega)
    if not math.isfinite(omega) or omega < 0 or (strict and omega == 0):
        rel = ">" if strict else ">="
        raise DomainError(f"omega must be finite and {rel} 0, got {omega!r}")
    return omega


def _products(omega, times):
    return omega * times


def _phase_factor(x):
    """``exp(-pi / (2x))`` with ``x = 0`` mapped to 0."""
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.exp(-math.pi / (2.0 * np.where(x > 0, x, 1.0))), 0.0)


def storage_loss_K(omega: float, spec: BiphasicSpectrum, with_bound: bool = False):
    """Apparent relative storage and loss moduli ``(K1, K2)``."""
    omega = _check_omega(omega)
    x = _products(omega, spec.rho)
    A = spec.coeff_A
    den = 1.0 + x * x
    K1 = 1.0 + math.fsum(x * x * A / den)
    K2 = math.fsum(x * A / den)
    if not with_bound:
        return K1, K2
    xN = x[-1]
    # x^2/(1+x^2) is increasing and x/(1+x^2) <= min(x, 1/2) over n > N
    bound = spec.sum_A_tail * max(xN * xN / (1.0 + xN * xN), min(xN, 0.5))
    return K1, K2, bound


def storage_loss_M(omega: float, spec: BiphasicSpectrum, with_bound: bool = False):
    """Apparent relative storage and loss compliances ``(M1, M2)``."""
    omega = _check_omega(omega)
    x = _products(omega, spec.tau)
    B = spec.coeff_B
    den = 1.0 + x * x
    M1 = 1.0 - math.fsum(x * x * B / den)
    M2 = math.fsum(x * B / den)
    if not with_bound:
        return M1, M2
    xN = x[-1]
    bound = spec.sum_B_tail * max(xN * xN / (1.0 + xN * xN), min(xN, 0.5))
    return M1, M2, bound


def loss_angle(omega: float, spec: BiphasicSpectrum) -> float:
    """Phase lead of force over displacement, ``atan2(K2, K1)``."""
    K1, K2 = storage_loss_K(omega, spec)
    return math.atan2(K2, K1)


def incomplete_storage_K(omega: float, spec: BiphasicSpectrum, with_bound: bool = False):
    """Incomplete apparent storage modulus (quarter-period snapshot of K)."""
    omega = _check_omega(omega, strict=True)
    x = _products(omega, spec.rho)
    e = _phase_factor(x)
    value = 1.0 + math.fsum(x * spec.coeff_A / (x * x + 1.0) * (x - e))
    if not with_bound:
        return value
    xN = x[-1]
    # |x (x - e)/(1+x^2)| <= x^2 + x e(x), increasing in x
    bound = spec.sum_A_tail * min(1.0, xN * xN + xN * float(_phase_factor(np.array(xN))))
    return value, bound


def storage_gap_K(omega: float, spec: BiphasicSpectrum) -> float:
    """``K1 - K1_tilde`` summed directly, without cancellation.

    At low frequency both moduli are close to 1 and differ by roughly
    ``omega rho_1 exp(-pi / (2 omega rho_1))``, far below rounding of either.
    """
    omega = _check_omega(omega, strict=True)
    x = _products(omega, spec.rho)
    return math.fsum(spec.coeff_A * x * _phase_factor(x) / (1.0 + x * x))


def incomplete_storage_M(omega: float, spec: BiphasicSpectrum, with_bound: bool = False):
    """Incomplete apparent storage compliance (quarter-period snapshot of M).

    Consistent with the creep function written as ``M0 + sum B_n (1 - e^{-t/tau_n})``.
    """
    omega = _check_omega(omega, strict=True)
    x = _products(omega, spec.tau)
    e = _phase_factor(x)
    value = spec.M0 + math.fsum(spec.coeff_B / (x * x + 1.0) * (1.0 + x * e))
    if not with_bound:
        return value
    return value, spec.sum_B_tail


def incomplete_quadrature(omega: float, spec: BiphasicSpectrum, which: str = "K", tol: float = 1e-12) -> float:
    """Quarter-period integral ``omega int_0^{pi/(2 omega)} kernel(t) sin(omega t) dt``.

    Direct adaptive quadrature of the definition, with the same truncated
    kernels the closed forms sum (``M`` in its saturating form). Oracle only.
    """
    omega = _check_omega(omega, strict=True)
    if which == "K":
        kernel, times = (lambda t: prony_K(t, spec)), spec.rho
    elif which == "M":
        kernel, times = (lambda t: prony_M(t, spec, "saturating")), spec.tau
    else:
        raise DomainError(f"which must be 'K' or 'M', got {which!r}")
    end = math.pi / (2.0 * omega)
    positive = times[times > 0]
    points = None
    if positive.size:
        # break at the kernel's own time scales, where it bends
        points = [q for q in np.geomspace(positive.min(), positive.max(), 24) if 0 < q < end]
    value, err = integrate.quad(
        lambda t: kernel(t) * math.sin(omega * t), 0.0, end,
        epsabs=0.1 * tol / omega, epsrel=1e-14, limit=2000, points=points or None,
    )
    if not omega * err <= tol:
        raise OracleFailure("quadrature of the incomplete modulus missed its tolerance", {"omega": omega, "error": omega * err})
    return omega * value


@lru_cache(maxsize=1)
def sqrt_sine_integral() -> float:
    """``integral_0^{pi/2} sqrt(x) sin(x) dx`` by adaptive quadrature."""
    # x = u^2 removes the sqrt endpoint singularity
    value, err = integrate.quad(
        lambda u: 2.0 * u * u * math.sin(u * u), 0.0, math.sqrt(math.pi / 2), epsabs=1e-14, epsrel=1e-13
    )
    if err > 1e-12:
        raise OracleFailure("quadrature for the sqrt-sine constant missed 1e-12", {"error": err})
    return value


def highfreq_asymptote_K_tilde(omega: float, p: MaterialParams) -> float:
    """Two-term high-frequency expansion of the incomplete storage modulus."""
    omega = _check_omega(omega, strict=True)
    nu, H_A, _, t_g = derive_constants(p)
    K0 = 3.0 / (2.0 * (1.0 + nu))
    if nu == 0.5:
        return K0
    coeff = sqrt_sine_integral() * (1.0 - 2.0 * nu) / (math.sqrt(math.pi) * (1.0 - nu * nu))
    return K0 - coeff / math.sqrt(omega * t_g)


def terms_for_frequency(omega: float, spec: BiphasicSpectrum, ratio: float = 1e-3) -> BiphasicSpectrum:
    """Grow the truncation until ``omega * rho_N <= ratio`` (or the root cap)."""
    omega = _check_omega(omega)
    current = spec
    while omega * current.rho[-1] > ratio and current.n_terms < MAX_ROOTS:
        # rho_n ~ t_g / (n pi)^2
        need = int(math.sqrt(omega * spec.t_g / ratio) / math.pi) + 2
        n = min(MAX_ROOTS, max(2 * current.n_terms, need))
        current = spec.with_terms(n)
    return current


def evaluate(omega: float, spec: BiphasicSpectrum) -> ModuliEval:
    """All frequency-domain quantities at ``omega``; K1_tilde/M1_tilde are NaN at 0."""
    omega = _check_omega(omega)
    K1, K2, bK = storage_loss_K(omega, spec, with_bound=True)
    M1, M2, bM = storage_loss_M(omega, spec, with_bound=True)
    if omega > 0:
        Kt, bKt = incomplete_storage_K(omega, spec, with_bound=True)
        Mt, bMt = incomplete_storage_M(omega, spec, with_bound=True)
    else:
        Kt = Mt = math.nan
        bKt = bMt = 0.0
    return ModuliEval(
        omega=omega,
        K1=K1,
        K2=K2,
        M1=M1,
        M2=M2,
        K1_tilde=Kt,
        M1_tilde=Mt,
        loss_angle=math.atan2(K2, K1),
        tail_bound=max(bK, bM, bKt, bMt),
        n_terms=spec.n_terms,
    )


def frequency_grid(omega_min: float, omega_max: float, points: int, spacing: str = "log") -> np.ndarray:
    """Sweep grid in rad/s; log spacing by default."""
    if points < 1:
        raise DomainError(f"points must be >= 1, got {points}")
    if not (0 <= omega_min <= omega_max) or not math.isfinite(omega_max):
        raise DomainError(f"need 0 <= omega_min <= omega_max, got {omega_min!r}, {omega_max!r}")
    if spacing == "log":
        if omega_min <= 0:
            raise DomainError("log spacing needs omega_min > 0")
        return np.geomspace(omega_min, omega_max, points)
    if spacing == "linear":
        return np.linspace(omega_min, omega_max, points)
    raise DomainError(f"spacing must be 'log' or 'linear', got {spacing!r}")
