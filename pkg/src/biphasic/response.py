"""Force and displacement histories for the four loading protocols.

``cyclic_displacement``  w(t) = w0 (1 - cos wt) + w1      -> force F(t)
``cyclic_force``         F(t) = F0 (1 - cos wt) + F1      -> displacement w(t)
``halfsine_displacement`` w(t) = w0 sin wt, 0 < t < pi/w  -> force F(t)
``halfsine_force``       F(t) = F0 sin wt, 0 < t < pi/w   -> displacement w(t)

The closed forms integrate the hereditary integrals term by term over the
truncated Prony series, using::

    int_0^t cos(w s) exp(-(t-s)/r) ds = r (cos wt + w r sin wt - exp(-t/r)) / (1 + w^2 r^2)

The step part of the cyclic inputs (w1 or F1 applied at t = 0) multiplies
the adaptively truncated kernels of :mod:`biphasic.kernels`, so the jump
at t = 0+ is the exact instantaneous response.

:func:`convolve_oracle` evaluates the same integrals by adaptive
quadrature and is what the closed forms are checked against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from biphasic.errors import DomainError, OracleFailure, SearchFailure, ValidationError
from biphasic.kernels import creep_M, decay, prony_K, prony_M, relaxation_K
from biphasic.material import BiphasicSpectrum, MaterialParams
from biphasic.moduli import storage_loss_K, storage_loss_M

__all__ = [
    "LoadingProtocol",
    "ProtocolKind",
    "ResponseTrace",
    "contact_duration",
    "convolve_oracle",
    "cyclic_displacement_response",
    "cyclic_force_response",
    "default_time_grid",
    "halfsine_displacement_test",
    "halfsine_force_test",
    "input_value",
    "oracle_response",
    "respond",
    "simulate",
]

CONTACT_SEARCH_PERIODS = 10


class ProtocolKind(str, enum.Enum):
    CYCLIC_DISPLACEMENT = "cyclic_displacement"
    CYCLIC_FORCE = "cyclic_force"
    HALFSINE_DISPLACEMENT = "halfsine_displacement"
    HALFSINE_FORCE = "halfsine_force"

    @property
    def displacement_driven(self) -> bool:
        return self in (ProtocolKind.CYCLIC_DISPLACEMENT, ProtocolKind.HALFSINE_DISPLACEMENT)

    @property
    def halfsine(self) -> bool:
        return self in (ProtocolKind.HALFSINE_DISPLACEMENT, ProtocolKind.HALFSINE_FORCE)


@dataclass(frozen=True)
class LoadingProtocol:
    """Input history. ``amplitude``/``preoffset`` are metres or newtons by kind."""

    kind: ProtocolKind
    omega: float
    amplitude: float
    preoffset: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ProtocolKind(self.kind))
        except ValueError:
            raise ValidationError([f"kind: unknown protocol {self.kind!r}"]) from None
        failures = []
        if not (math.isfinite(self.omega) and self.omega > 0):
            failures.append(f"omega must be finite and > 0, got {self.omega!r}")
        if not math.isfinite(self.amplitude) or self.amplitude == 0:
            failures.append(f"amplitude must be finite and nonzero, got {self.amplitude!r}")
        if not math.isfinite(self.preoffset):
            failures.append(f"preoffset must be finite, got {self.preoffset!r}")
        elif self.kind.halfsine and self.preoffset != 0:
            failures.append("preoffset must be 0 for half-sine protocols")
        if failures:
            raise ValidationError(failures)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def peak_time(self) -> float:
        """Time of the input maximum for half-sine kinds, ``pi/(2 omega)``."""
        return math.pi / (2.0 * self.omega)


@dataclass(frozen=True, eq=False)
class ResponseTrace:
    times: np.ndarray
    inputs: np.ndarray
    values: np.ndarray
    protocol: LoadingProtocol
    meta: dict = field(default_factory=dict)


def _times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"time must be finite and >= 0, got {t!r}")
    return arr


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _expect(proto, kind):
    if proto.kind is not kind:
        raise DomainError(f"expected a {kind.value} protocol, got {proto.kind.value}")


def input_value(t, proto: LoadingProtocol):
    """Prescribed displacement (m) or force (N) at ``t``; zero outside the half-sine window."""
    t = _times(t)
    wt = proto.omega * t
    if proto.kind.halfsine:
        inside = t <= math.pi / proto.omega
        return _out(np.where(inside, proto.amplitude * np.sin(wt), 0.0))
    return _out(proto.amplitude * (1.0 - np.cos(wt)) + proto.preoffset)


def _step_kernel(t, kernel, spec):
    return np.array([kernel(float(ti), spec).value for ti in np.ravel(t)]).reshape(np.shape(t))


def cyclic_force_response(t, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum):
    """Contact force (N) under ``w(t) = w0 (1 - cos wt) + w1``."""
    _expect(proto, ProtocolKind.CYCLIC_DISPLACEMENT)
    t = _times(t)
    w, w0, w1 = proto.omega, proto.amplitude, proto.preoffset
    x = w * spec.rho
    K1, K2 = storage_loss_K(w, spec)
    transient = 1.0 + decay(t, spec.rho) @ (x * x * spec.coeff_A / (1.0 + x * x))
    bracket = w0 * transient - w0 * (K1 * np.cos(w * t) - K2 * np.sin(w * t))
    if w1 != 0:
        bracket = bracket + w1 * _step_kernel(t, relaxation_K, spec)
    return _out(p.stiffness * bracket)


def cyclic_displacement_response(t, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum):
    """Plate displacement (m) under ``F(t) = F0 (1 - cos wt) + F1``."""
    _expect(proto, ProtocolKind.CYCLIC_FORCE)
    t = _times(t)
    w, F0, F1 = proto.omega, proto.amplitude, proto.preoffset
    x = w * spec.tau
    M1, M2 = storage_loss_M(w, spec)
    transient = 1.0 - decay(t, spec.tau) @ (x * x * spec.coeff_B / (1.0 + x * x))
    bracket = F0 * transient - F0 * (M1 * np.cos(w * t) + M2 * np.sin(w * t))
    if F1 != 0:
        bracket = bracket + F1 * _step_kernel(t, creep_M, spec)
    return _out(bracket / p.stiffness)


def _cos_convolution(t, w, times):
    """``int_0^t cos(w s) exp(-(t-s)/r) ds`` for every r in ``times`` (shape t x N)."""
    t = np.asarray(t, dtype=float)[..., None]
    r = np.asarray(times, dtype=float)
    wr = w * r
    e = decay(t[..., 0], r)
    return r * (np.cos(w * t) + wr * np.sin(w * t) - e) / (1.0 + wr * wr)


def halfsine_displacement_test(t, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum):
    """Contact force (N) for ``w(t) = w0 sin wt``.

    Valid on ``0 <= t <= pi/w``; later times continue the same formula
    (used by :func:`contact_duration`) and are flagged by :func:`simulate`.
    """
    _expect(proto, ProtocolKind.HALFSINE_DISPLACEMENT)
    t = _times(t)
    w = proto.omega
    conv = np.sin(w * t) / w + _cos_convolution(t, w, spec.rho) @ spec.coeff_A
    return _out(p.stiffness * proto.amplitude * w * conv)


def halfsine_force_test(t, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum):
    """Plate displacement (m) for ``F(t) = F0 sin wt`` with ``M = M0 + sum B_n (1 - e^{-t/tau_n})``."""
    _expect(proto, ProtocolKind.HALFSINE_FORCE)
    t = _times(t)
    w = proto.omega
    plateau = spec.M0 + math.fsum(spec.coeff_B)
    conv = plateau * np.sin(w * t) / w - _cos_convolution(t, w, spec.tau) @ spec.coeff_B
    return _out(proto.amplitude * w * conv / p.stiffness)


_RESPONDERS = {
    ProtocolKind.CYCLIC_DISPLACEMENT: cyclic_force_response,
    ProtocolKind.CYCLIC_FORCE: cyclic_displacement_response,
    ProtocolKind.HALFSINE_DISPLACEMENT: halfsine_displacement_test,
    ProtocolKind.HALFSINE_FORCE: halfsine_force_test,
}


def respond(t, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum):
    """Dispatch to the closed-form response of ``proto.kind``."""
    return _RESPONDERS[proto.kind](t, proto, p, spec)


def contact_duration(proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum) -> float:
    """Time at which the half-sine test ends.

    Force-controlled: ``pi/omega`` by construction. Displacement-controlled:
    first zero of the contact force after the displacement peak, located by
    scanning for a sign change and refining with Brent's method.
    """
    w = proto.omega
    if proto.kind is ProtocolKind.HALFSINE_FORCE:
        return math.pi / w
    _expect(proto, ProtocolKind.HALFSINE_DISPLACEMENT)
    if not np.any(spec.coeff_A):
        return math.pi / w  # purely elastic: F is proportional to sin(wt)

    def force(t):
        return float(halfsine_displacement_test(t, proto, p, spec))

    t_lo = proto.peak_time
    f_lo = force(t_lo)
    step = proto.period / 16.0
    t_end = CONTACT_SEARCH_PERIODS * math.pi / w
    trace = [(t_lo, f_lo)]
    while t_lo < t_end:
        t_hi = min(t_lo + step, t_end)
        f_hi = force(t_hi)
        trace.append((t_hi, f_hi))
        if f_hi == 0.0:
            return t_hi
        if math.copysign(1.0, f_hi) != math.copysign(1.0, f_lo):
            return optimize.brentq(force, t_lo, t_hi, xtol=1e-14 * t_hi, rtol=1e-14, maxiter=500)
        t_lo, f_lo = t_hi, f_hi
    raise SearchFailure(
        f"contact force does not vanish within (pi/(2w), {CONTACT_SEARCH_PERIODS} pi/w]", trace
    )


def convolve_oracle(
    kernel: Callable[[float], float],
    input_derivative: Callable[[float], float],
    t: float,
    tol: float = 1e-10,
    jumps: Sequence[tuple[float, float]] = (),
    points: Sequence[float] | None = None,
    limit: int = 1000,
) -> float:
    """``int_0^t input'(s) kernel(t - s) ds + sum_j size_j kernel(t - t_j)``.

    ``jumps`` holds ``(t_j, size_j)`` pairs for step discontinuities of the
    input (a step at 0 is the Dirac term of the derivative). Raises
    :class:`OracleFailure` when the quadrature error estimate exceeds ``tol``.
    """
    t = float(t)
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"time must be finite and >= 0, got {t!r}")
    total = 0.0
    for t_j, size in jumps:
        if t_j <= t:
            total += size * kernel(t - t_j)
    if t == 0:
        return total
    pts = None
    if points is not None:
        pts = sorted({float(q) for q in points if 0.0 < q < t})
    value, err = integrate.quad(
        lambda s: input_derivative(s) * kernel(t - s),
        0.0,
        t,
        epsabs=0.1 * tol,
        epsrel=1e-13,
        limit=limit,
        points=pts or None,
    )
    if not err <= tol:
        raise OracleFailure(
            f"convolution quadrature error {err:.2e} exceeds tolerance {tol:.2e}",
            {"t": t, "value": value, "error": err},
        )
    return total + value


def _boundary_points(t, times):
    # the kernel varies on scales tau_n just behind the upper limit
    scales = np.asarray(times)[np.asarray(times) > 0]
    if scales.size == 0:
        return None
    picks = np.geomspace(scales.min(), scales.max(), 12) * np.array([1.0])
    return [t - 5.0 * r for r in picks]


def oracle_response(t: float, proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum, rel_tol: float = 1e-10) -> float:
    """Protocol response by direct quadrature of the hereditary integral.

    Uses the same truncated kernel each closed form integrates, and the
    adaptive step kernels for any ``w1``/``F1`` jump at t = 0.
    """
    w, amp = proto.omega, proto.amplitude
    kind = proto.kind
    if kind is ProtocolKind.CYCLIC_DISPLACEMENT:
        kernel = lambda s: prony_K(s, spec)  # noqa: E731
        rate = lambda s: amp * w * math.sin(w * s)  # noqa: E731
        step = lambda s: relaxation_K(s, spec).value  # noqa: E731
        times = spec.rho
    elif kind is ProtocolKind.CYCLIC_FORCE:
        kernel = lambda s: prony_M(s, spec, "decaying")  # noqa: E731
        rate = lambda s: amp * w * math.sin(w * s)  # noqa: E731
        step = lambda s: creep_M(s, spec).value  # noqa: E731
        times = spec.tau
    elif kind is ProtocolKind.HALFSINE_DISPLACEMENT:
        kernel = lambda s: prony_K(s, spec)  # noqa: E731
        rate = lambda s: amp * w * math.cos(w * s)  # noqa: E731
        step = None
        times = spec.rho
    else:
        kernel = lambda s: prony_M(s, spec, "saturating")  # noqa: E731
        rate = lambda s: amp * w * math.cos(w * s)  # noqa: E731
        step = None
        times = spec.tau
    scale = abs(amp) * max(1.0, spec.K0, 1.0 / spec.M0)
    value = convolve_oracle(kernel, rate, t, tol=rel_tol * scale, points=_boundary_points(t, times))
    if proto.preoffset != 0 and step is not None:
        value += proto.preoffset * step(float(t))
    if kind.displacement_driven:
        return p.stiffness * value
    return value / p.stiffness


def default_time_grid(proto: LoadingProtocol, periods: float = 2.0, points_per_period: int = 40, refine: int = 10) -> np.ndarray:
    """Uniform grid with ``points_per_period`` per period, plus log-spaced points near 0."""
    if proto.kind.halfsine:
        t_end = math.pi / proto.omega
        n = max(points_per_period // 2, 2)
    else:
        t_end = periods * proto.period
        n = max(int(math.ceil(periods * points_per_period)), 2)
    uniform = np.linspace(0.0, t_end, n + 1)
    first = uniform[1]
    early = np.geomspace(first * 1e-4, first, refine + 1)[:-1] if refine > 0 else np.empty(0)
    return np.unique(np.concatenate((uniform, early)))


def simulate(proto: LoadingProtocol, p: MaterialParams, spec: BiphasicSpectrum, times=None) -> ResponseTrace:
    """Sample the response of ``proto`` on ``times`` (auto grid if None)."""
    times = default_time_grid(proto) if times is None else _times(times)
    times = np.atleast_1d(times)
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise DomainError("times must be strictly increasing")
    values = np.atleast_1d(respond(times, proto, p, spec))
    inputs = np.atleast_1d(input_value(times, proto))
    meta = {
        "protocol": proto.kind.value,
        "omega": proto.omega,
        "amplitude": proto.amplitude,
        "preoffset": proto.preoffset,
        "n_terms": spec.n_terms,
        "output": "force_N" if proto.kind.displacement_driven else "displacement_m",
    }
    if proto.kind.halfsine:
        meta["beyond_input_window"] = bool(np.any(times > math.pi / proto.omega))
    return ResponseTrace(times=times, inputs=inputs, values=values, protocol=proto, meta=meta)
