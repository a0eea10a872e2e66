"""Relaxation and creep kernels in the time and Laplace domains.

Dimensional kernels (time in seconds)::

    K(t) = 1 + sum A_n exp(-t/rho_n)        K(0) = K0 = 3/(2(1+nu))
    M(t) = 1 - sum B_n exp(-t/tau_n)        M(0) = M0 = 2(1+nu)/3

Dimensionless kernels are ``K_hat = 2(1+nu) K`` and ``M_hat = M/(2(1+nu))``
as functions of ``t_hat = t/t_g``. Their Laplace transforms ``K_bar`` and
``M_bar`` are closed-form ratios of modified Bessel functions of ``sqrt(s)``.

:func:`relaxation_K` and :func:`creep_M` grow the truncation until a
rigorous bound on the omitted terms drops below ``tol``; :func:`prony_K`
and :func:`prony_M` evaluate a fixed truncation and are what the closed-form
responses and moduli are consistent with. :func:`invert_laplace` is a
fixed-Talbot inversion used as an independent oracle for the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple

import numpy as np

from biphasic.charroots import MAX_ROOTS
from biphasic.errors import DomainError, OracleFailure
from biphasic.material import BiphasicSpectrum, instantaneous_compliance, instantaneous_modulus
from biphasic.specfun import bessel_i_ratio

__all__ = [
    "DEFAULT_INVERSION_ACCURACY",
    "DEFAULT_KERNEL_TOL",
    "InversionResult",
    "KernelEval",
    "creep_M",
    "decay",
    "invert_laplace",
    "invert_laplace_with_error",
    "laplace_K",
    "laplace_M",
    "prony_K",
    "prony_M",
    "relaxation_K",
    "required_terms",
    "short_time_K",
    "short_time_M",
]

DEFAULT_KERNEL_TOL = 1e-12
DEFAULT_INVERSION_ACCURACY = 1e-8
_EPS = np.finfo(float).eps
# truncations are rounded up to this granularity so spectra get reused
_TERM_STEP = 64


@dataclass(frozen=True)
class KernelEval:
    """Kernel value at one time.

    ``dimensional`` tells whether ``t`` is in seconds (and ``value`` is K or
    M) or in units of the gel diffusion time (``value`` is K_hat or M_hat).
    ``tail_bound`` bounds the truncation error of ``value``; ``cap_hit`` is
    set when the requested tolerance needed more than the root cap.
    """

    t: float
    dimensional: bool
    value: float
    n_terms_used: int
    tail_bound: float
    cap_hit: bool = False


def decay(t, times):
    """``exp(-t/times)`` with the limits ``times = 0`` handled (t >= 0)."""
    t = np.asarray(t, dtype=float)
    times = np.asarray(times, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(-t[..., None] / times)
    return np.where(t[..., None] == 0.0, 1.0, np.where(times == 0.0, 0.0, out))


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _check_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"time must be finite and >= 0, got {t!r}")
    return arr


def prony_K(t, spec: BiphasicSpectrum):
    """Fixed-truncation relaxation function ``1 + sum_{n<=N} A_n exp(-t/rho_n)``."""
    t = _check_times(t)
    return _scalar(1.0 + decay(t, spec.rho) @ spec.coeff_A)


def prony_M(t, spec: BiphasicSpectrum, form: Literal["decaying", "saturating"] = "decaying"):
    """Fixed-truncation creep function.

    ``form="decaying"`` sums ``1 - sum B_n exp(-t/tau_n)`` (exact as t -> inf);
    ``form="saturating"`` sums ``M0 + sum B_n (1 - exp(-t/tau_n))`` (exact at
    t = 0). They differ by the constant omitted mass ``sum_{n>N} B_n``.
    """
    t = _check_times(t)
    e = decay(t, spec.tau)
    if form == "decaying":
        return _scalar(1.0 - e @ spec.coeff_B)
    if form == "saturating":
        return _scalar(spec.M0 + (1.0 - e) @ spec.coeff_B)
    raise DomainError(f"unknown creep form {form!r}")


def _tail(mass_bound, root_N, t_hat):
    # sum_{n>N} w_n exp(-x_n^2 t) <= exp(-x_N^2 t) sum_{n>N} w_n  (w_n >= 0 there)
    return mass_bound * math.exp(-(root_N**2) * t_hat)


def required_terms(t_hat: float, spec: BiphasicSpectrum, which: Literal["A", "B"] = "A", tol: float = DEFAULT_KERNEL_TOL):
    """Smallest truncation >= ``spec.n_terms`` whose tail bound at ``t_hat`` is <= tol.

    Returns ``(spectrum, tail_bound, cap_hit)``.
    """
    current = spec
    while True:
        roots = current.alpha if which == "A" else current.beta
        mass = current.sum_A_tail if which == "A" else current.sum_B_tail
        bound = _tail(mass, roots[-1], t_hat)
        if bound <= tol:
            return current, bound, False
        if current.n_terms >= MAX_ROOTS:
            return current, bound, True
        # roots grow like n*pi; aim straight for the needed index
        need = math.sqrt(max(math.log(max(mass, tol) / tol), 1.0) / t_hat) / math.pi + 2
        n = max(2 * current.n_terms, int(need))
        n = min(MAX_ROOTS, -(-n // _TERM_STEP) * _TERM_STEP)
        current = spec.with_terms(n)


def relaxation_K(t: float, spec: BiphasicSpectrum, dimensional: bool = True, tol: float = DEFAULT_KERNEL_TOL) -> KernelEval:
    """Relaxation function K(t) (``dimensional``) or K_hat(t_hat)."""
    t = float(_check_times(t))
    scale = 1.0 if dimensional else 2.0 * (1.0 + spec.nu_s)
    if t == 0.0 or not np.any(spec.coeff_A):
        value = spec.K0 if t == 0.0 else 1.0
        return KernelEval(t, dimensional, scale * value, spec.n_terms, 0.0)
    t_hat = t / spec.t_g if dimensional else t
    used, bound, capped = required_terms(t_hat, spec, "A", tol / scale)
    terms = used.coeff_A * np.exp(-(used.alpha**2) * t_hat)
    value = 1.0 + math.fsum(terms)
    bound += 4.0 * _EPS * (1.0 + float(np.sum(np.abs(terms))))
    return KernelEval(t, dimensional, scale * value, used.n_terms, scale * bound, capped)


def creep_M(t: float, spec: BiphasicSpectrum, dimensional: bool = True, tol: float = DEFAULT_KERNEL_TOL) -> KernelEval:
    """Creep function M(t) (``dimensional``) or M_hat(t_hat).

    ``M(0) = M0`` exactly; for t > 0 the decaying form is summed with as
    many terms as the tail bound requires.
    """
    t = float(_check_times(t))
    scale = 1.0 if dimensional else 1.0 / (2.0 * (1.0 + spec.nu_s))
    if t == 0.0 or not np.any(spec.coeff_B):
        value = spec.M0 if t == 0.0 else 1.0
        return KernelEval(t, dimensional, scale * value, spec.n_terms, 0.0)
    t_hat = t / spec.t_g if dimensional else t
    used, bound, capped = required_terms(t_hat, spec, "B", tol / scale)
    terms = used.coeff_B * np.exp(-(used.beta**2) * t_hat)
    value = 1.0 - math.fsum(terms)
    bound += 4.0 * _EPS * (1.0 + float(np.sum(np.abs(terms))))
    return KernelEval(t, dimensional, scale * value, used.n_terms, scale * bound, capped)


def _bessel_q(s):
    """``I1(sqrt s) / (sqrt(s) I0(sqrt s))``; even in sqrt(s), so the branch is immaterial."""
    s = np.asarray(s)
    if np.any(s == 0):
        raise DomainError("Laplace kernels have a pole at s = 0")
    if np.iscomplexobj(s) or np.any(np.real(s) < 0):
        z = np.sqrt(s.astype(complex))
    else:
        z = np.sqrt(s.astype(float))
    return bessel_i_ratio(z) / z


def _c(nu_s):
    if not (-1.0 < nu_s <= 0.5):
        raise DomainError(f"nu_s must satisfy -1 < nu_s <= 0.5, got {nu_s!r}")
    # 2 mu_s / H_A expressed through the Poisson ratio
    return (1.0 - 2.0 * nu_s) / (1.0 - nu_s)


def _guard(den):
    if np.any(np.abs(den) < 1e-300):
        raise OracleFailure("Laplace kernel denominator underflowed (s at or near a pole)")
    return den


def laplace_K(s, nu_s: float):
    """``K_bar(s) = (3 I0 - 4c I1/sqrt s) / (s (I0 - c I1/sqrt s))`` at ``sqrt s``."""
    cq = _c(nu_s) * _bessel_q(s)
    s = np.asarray(s)
    return _scalar((3.0 - 4.0 * cq) / _guard(s * (1.0 - cq)))


def laplace_M(s, nu_s: float):
    """``M_bar(s) = (I0 - c I1/sqrt s) / (s (3 I0 - 4c I1/sqrt s))``."""
    cq = _c(nu_s) * _bessel_q(s)
    s = np.asarray(s)
    return _scalar((1.0 - cq) / _guard(s * (3.0 - 4.0 * cq)))


class InversionResult(NamedTuple):
    value: float
    error_estimate: float


def _talbot(transform, t, m):
    # fixed Talbot contour s(theta) = r theta (cot theta + i), r = 2m / (5t)
    r = 2.0 * m / (5.0 * t)
    theta = np.arange(1, m) * math.pi / m
    cot = 1.0 / np.tan(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    f0 = np.asarray(transform(np.array([r + 0j])), dtype=complex).reshape(-1)[0]
    fk = np.asarray(transform(s), dtype=complex)
    terms = np.exp(t * s) * fk * (1.0 + 1j * sigma)
    head = 0.5 * math.exp(r * t) * f0.real
    value = r / m * (head + float(np.sum(terms.real)))
    magnitude = r / m * (abs(head) + float(np.sum(np.abs(terms))))
    return value, magnitude


def invert_laplace_with_error(transform: Callable, t: float, orders=(16, 24)) -> InversionResult:
    """Fixed-Talbot inverse Laplace transform at ``t > 0``.

    ``transform`` must accept a complex numpy array. The error estimate is
    the spread between the two contour resolutions in ``orders`` plus a
    rounding allowance proportional to the largest contour contribution.
    """
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"inversion time must be finite and > 0, got {t!r}")
    values = []
    magnitude = 0.0
    for m in orders:
        v, mag = _talbot(transform, t, m)
        if not math.isfinite(v):
            raise OracleFailure("Talbot inversion produced a non-finite value", {"t": t, "order": m})
        values.append(v)
        magnitude = max(magnitude, mag)
    spread = max(values) - min(values)
    return InversionResult(values[-1], spread + 64.0 * _EPS * magnitude)


def invert_laplace(transform: Callable, t: float, accuracy: float = DEFAULT_INVERSION_ACCURACY) -> float:
    """Inverse Laplace transform at ``t``; raises if the error estimate exceeds ``accuracy``."""
    result = invert_laplace_with_error(transform, t)
    if result.error_estimate > accuracy:
        raise OracleFailure(
            f"inverse Laplace estimate {result.error_estimate:.2e} exceeds accuracy {accuracy:.2e}",
            {"t": t, "value": result.value, "error_estimate": result.error_estimate},
        )
    return result.value


def short_time_K(t_hat, nu_s: float):
    """Two-term small-time expansion of K_hat: ``3 - 2c sqrt(t_hat/pi)``."""
    t_hat = _check_times(t_hat)
    return _scalar(3.0 - 2.0 * _c(nu_s) / math.sqrt(math.pi) * np.sqrt(t_hat))


def short_time_M(t_hat, nu_s: float):
    """Two-term small-time expansion of M_hat: ``1/3 + 2c sqrt(t_hat/pi) / 9``."""
    t_hat = _check_times(t_hat)
    return _scalar(1.0 / 3.0 + 2.0 * _c(nu_s) / (9.0 * math.sqrt(math.pi)) * np.sqrt(t_hat))


def long_time_K_hat(nu_s: float) -> float:
    """Equilibrium value of K_hat, ``2(1+nu)``."""
    return 2.0 * (1.0 + nu_s)


def long_time_M_hat(nu_s: float) -> float:
    """Equilibrium value of M_hat, ``1/(2(1+nu))``."""
    return 1.0 / (2.0 * (1.0 + nu_s))


# instantaneous values re-exported for callers working only with kernels
K0 = instantaneous_modulus
M0 = instantaneous_compliance
