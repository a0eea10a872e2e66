"""Bessel functions needed by the unconfined-compression model.

Only J0, J1 (first kind) and I0, I1 (modified, first kind) appear in the
model. The public functions are thin, domain-checked wrappers around the
Cephes/AMOS routines shipped with :mod:`scipy.special`, which meet the
accuracy contracts below on the argument ranges the model uses:

==================  ==============================  ====================
function            real argument                   complex argument
==================  ==============================  ====================
``bessel_j0``        abs. error <= 1e-13, |x|<=100   --
``bessel_i0/i1``     rel. error <= 1e-12, 0<=x<=700  rel. error <= 1e-10
``bessel_i_ratio``   overflow-free for every x >= 0  overflow-free
==================  ==============================  ====================

Two independent evaluation routes live here as well, used by the test
suite and by anyone who wants a second opinion:

* :func:`ascending_series` sums the power series directly and returns a
  :class:`BesselEval` carrying a rigorous bound on the truncated tail.
* :func:`i_ratio_continued_fraction` evaluates ``I1(z)/I0(z)`` from the
  Gauss continued fraction (modified Lentz), which never overflows.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from biphasic.errors import DomainError, OracleFailure, RangeError

__all__ = [
    "BesselEval",
    "ascending_series",
    "bessel_i0",
    "bessel_i0e",
    "bessel_i1",
    "bessel_i1e",
    "bessel_i_ratio",
    "bessel_j0",
    "bessel_j1",
    "bessel_j1_over_x",
    "i_ratio_continued_fraction",
]

J_MAX_ARG = 1e6
I_MAX_ARG = 700.0

# Below this |x| the two-term Taylor polynomial of J1(x)/x is exact in double.
_J1X_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class BesselEval:
    """A function value together with a conservative absolute error bound."""

    value: float
    abs_error_bound: float

    def __post_init__(self):
        if not self.abs_error_bound >= 0.0:
            raise ValueError("abs_error_bound must be nonnegative")


def _as_real(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: argument must be finite, got {x!r}")
    return arr


def _unwrap(arr):
    return arr.item() if arr.ndim == 0 else arr


def bessel_j0(x):
    """J0(x) for finite real ``x`` with ``|x| <= 1e6``."""
    arr = _as_real(x, "bessel_j0")
    if np.any(np.abs(arr) > J_MAX_ARG):
        raise DomainError(f"bessel_j0: |x| must not exceed {J_MAX_ARG:g}")
    return _unwrap(special.j0(arr))


def bessel_j1(x):
    """J1(x) for finite real ``x`` with ``|x| <= 1e6``."""
    arr = _as_real(x, "bessel_j1")
    if np.any(np.abs(arr) > J_MAX_ARG):
        raise DomainError(f"bessel_j1: |x| must not exceed {J_MAX_ARG:g}")
    return _unwrap(special.j1(arr))


def bessel_j1_over_x(x):
    """J1(x)/x, extended continuously to 1/2 at the origin (an even function)."""
    arr = _as_real(x, "bessel_j1_over_x")
    if np.any(np.abs(arr) > J_MAX_ARG):
        raise DomainError(f"bessel_j1_over_x: |x| must not exceed {J_MAX_ARG:g}")
    ax = np.abs(arr)
    small = ax < _J1X_SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = special.j1(ax) / ax
    x2 = ax * ax
    series = 0.5 - x2 / 16.0 + x2 * x2 / 384.0
    return _unwrap(np.where(small, series, direct))


def _check_i_arg(x, name):
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        arr = arr.astype(complex)
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"{name}: argument must be finite")
        return arr, True
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: argument must be finite, got {x!r}")
    if np.any(arr < 0):
        raise DomainError(f"{name}: argument must be >= 0 (model evaluates at sqrt(s), s > 0)")
    return arr, False


def _check_overflow(arr, name):
    if np.any(np.abs(np.real(arr)) > I_MAX_ARG):
        raise RangeError(
            f"{name}: |Re x| > {I_MAX_ARG:g} overflows; use the scaled variant "
            f"{name}e or bessel_i_ratio instead"
        )


def bessel_i0(x):
    """I0(x) for 0 <= x <= 700, or for complex x with |Re x| <= 700."""
    arr, is_complex = _check_i_arg(x, "bessel_i0")
    _check_overflow(arr, "bessel_i0")
    out = special.iv(0, arr) if is_complex else special.i0(arr)
    return _unwrap(np.asarray(out))


def bessel_i1(x):
    """I1(x) for 0 <= x <= 700, or for complex x with |Re x| <= 700."""
    arr, is_complex = _check_i_arg(x, "bessel_i1")
    _check_overflow(arr, "bessel_i1")
    out = special.iv(1, arr) if is_complex else special.i1(arr)
    return _unwrap(np.asarray(out))


def bessel_i0e(x):
    """Exponentially scaled ``exp(-|Re x|) * I0(x)``; never overflows."""
    arr, is_complex = _check_i_arg(x, "bessel_i0e")
    out = special.ive(0, arr) if is_complex else special.i0e(arr)
    return _unwrap(np.asarray(out))


def bessel_i1e(x):
    """Exponentially scaled ``exp(-|Re x|) * I1(x)``; never overflows."""
    arr, is_complex = _check_i_arg(x, "bessel_i1e")
    out = special.ive(1, arr) if is_complex else special.i1e(arr)
    return _unwrap(np.asarray(out))


def bessel_i_ratio(x):
    """I1(x)/I0(x) computed from the scaled functions.

    For real ``x >= 0`` the ratio increases from 0 towards 1. Complex
    arguments are accepted for Laplace-contour evaluations.
    """
    arr, is_complex = _check_i_arg(x, "bessel_i_ratio")
    if is_complex:
        out = special.ive(1, arr) / special.ive(0, arr)
    else:
        out = special.i1e(arr) / special.i0e(arr)
    return _unwrap(np.asarray(out))


def i_ratio_continued_fraction(z, tol=1e-16, max_terms=200_000):
    """I1(z)/I0(z) from ``I_k/I_{k-1} = 1 / (2k/z + I_{k+1}/I_k)``.

    Scalar only. Uses the modified Lentz algorithm; convergence needs roughly
    ``|z|`` terms, so this is an oracle rather than a fast path.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("i_ratio_continued_fraction: argument must be finite")
    if z == 0:
        return 0.0
    tiny = 1e-300
    # f = b1 + 1/(b2 + 1/(b3 + ...)) with b_k = 2k/z; the ratio is 1/f
    f = 2.0 / z
    if f == 0:
        f = tiny
    c = f
    d = 0.0
    for k in range(2, max_terms + 2):
        b = 2.0 * k / z
        d = b + d
        if d == 0:
            d = tiny
        c = b + 1.0 / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        raise OracleFailure(
            "continued fraction for I1/I0 did not converge",
            {"z": z, "terms": max_terms},
        )
    value = 1.0 / f
    return value.real if z.imag == 0 else value


_SERIES_ORDERS = {"j0": (0, -1.0), "j1": (1, -1.0), "i0": (0, 1.0), "i1": (1, 1.0)}


def ascending_series(name: str, x: float, terms: int = 60) -> BesselEval:
    """Sum the power series of J0, J1, I0 or I1 at real ``x``.

    The bound covers the truncated tail (geometric majorant once the term
    ratio drops below one) plus accumulated rounding. Meant for moderate
    arguments, |x| up to about 20; beyond that cancellation in the J series
    makes the bound large (but still honest).
    """
    if name not in _SERIES_ORDERS:
        raise DomainError(f"unknown series {name!r}; expected one of {sorted(_SERIES_ORDERS)}")
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("ascending_series: argument must be finite")
    order, sign = _SERIES_ORDERS[name]
    u = x * x / 4.0
    term = (x / 2.0) ** order / math.factorial(order)
    total = 0.0
    abs_total = 0.0
    for k in range(terms):
        total += term
        abs_total += abs(term)
        term *= sign * u / ((k + 1) * (k + 1 + order))
    # `term` is now the first omitted one; later ratios are at most u/(K+1)^2
    ratio = u / (terms + 1) ** 2
    if ratio < 1.0:
        tail = abs(term) / (1.0 - ratio)
    else:
        tail = math.inf
    rounding = 4.0 * terms * np.finfo(float).eps * abs_total
    return BesselEval(value=total, abs_error_bound=float(tail + rounding))
