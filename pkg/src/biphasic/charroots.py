"""Roots of the two characteristic equations ``J0(x) - c J1(x)/x = 0``.

The relaxation family (alpha roots) uses ``c = (1-2nu)/(1-nu)``; the
retardation family (beta roots) uses ``c = 4(1-2nu)/(3(1-nu))``.

Writing ``J0 = J1' + J1/x`` turns the equation into the Dini condition
``x J1'(x) + (1-c) J1(x) = 0``. For ``c < 2`` (always true when
``-1 < nu <= 0.5``) all of its roots are real and exactly one lies between
consecutive positive zeros of J1, with ``g(0) = 1 - c/2 > 0`` covering the
first one. The k-th root is therefore bracketed by ``(j1_{k-1}, j1_k)``
(``j1_0 = 0``), where ``g`` takes the nonzero values ``J0(j1_k)`` of
alternating sign. Bisection inside those brackets cannot miss or double
count a root, even for ``c -> 0`` or ``c -> 2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from biphasic.errors import BiphasicError, BracketingError, DomainError
from biphasic.specfun import bessel_j0, bessel_j1, bessel_j1_over_x

__all__ = [
    "CharacteristicRoots",
    "Family",
    "MAX_ROOTS",
    "RESIDUAL_TOL",
    "bessel_zeros",
    "characteristic_c",
    "find_roots",
    "large_root_asymptote",
]

MAX_ROOTS = 10_000
RESIDUAL_TOL = 1e-12
BISECTION_TOL = 1e-14


class Family(str, enum.Enum):
    RELAXATION = "relaxation"  # alpha roots, kernel K
    RETARDATION = "retardation"  # beta roots, kernel M

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        aliases = {"alpha": cls.RELAXATION, "beta": cls.RETARDATION}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(
                f"unknown root family {value!r}; use relaxation/alpha or retardation/beta"
            ) from None


@dataclass(frozen=True, eq=False)
class CharacteristicRoots:
    """First ``len(roots)`` positive roots of one characteristic equation.

    ``roots`` and ``residuals`` are read-only numpy arrays.
    """

    family: Family
    nu_s: float
    c: float
    roots: np.ndarray
    residuals: np.ndarray

    def __len__(self):
        return len(self.roots)


def _check_nu(nu_s):
    nu_s = float(nu_s)
    if not (-1.0 < nu_s <= 0.5):
        raise DomainError(f"nu_s must satisfy -1 < nu_s <= 0.5, got {nu_s!r}")
    return nu_s


def characteristic_c(family, nu_s: float) -> float:
    """Coefficient ``c`` multiplying ``J1(x)/x`` in the characteristic equation."""
    family = Family.parse(family)
    nu_s = _check_nu(nu_s)
    c = (1.0 - 2.0 * nu_s) / (1.0 - nu_s)
    if family is Family.RETARDATION:
        c = 4.0 * (1.0 - 2.0 * nu_s) / (3.0 * (1.0 - nu_s))
    # both families reach c = 2 only in the excluded limit nu_s -> -1
    assert 0.0 <= c < 2.0
    return c


def _mcmahon(order: int, k):
    """McMahon expansion for the k-th positive zero of J_order (order 0 or 1)."""
    k = np.asarray(k, dtype=float)
    mu = 4.0 * order * order
    b = (k + 0.5 * order - 0.25) * math.pi
    b8 = 8.0 * b
    return (
        b
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    )


def large_root_asymptote(family, nu_s: float, k: int) -> float:
    """Bracket centre for the k-th root: McMahon's ``j0_k`` shifted by ``-c/j0_k``.

    The shift is the first Newton step from ``j0_k`` on ``J0 - c J1/x``;
    the error is O(1/k) and only matters for choosing brackets.
    """
    if k < 1:
        raise DomainError(f"root index must be >= 1, got {k}")
    c = characteristic_c(family, nu_s)
    j = float(_mcmahon(0, k))
    return j - c / j


def _bisect(func, lo, hi, tol=BISECTION_TOL, max_iter=200):
    """Vectorised bisection; every bracket must already carry a sign change."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = func(lo)
    fhi = func(hi)
    bad = np.sign(flo) * np.sign(fhi) > 0
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise BracketingError("no sign change in bracket", (float(lo[i]), float(hi[i])))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (hi - lo > tol) & (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        fmid = func(mid)
        left = np.sign(fmid) == np.sign(flo)
        move_lo = active & left
        move_hi = active & ~left
        lo = np.where(move_lo, mid, lo)
        flo = np.where(move_lo, fmid, flo)
        hi = np.where(move_hi, mid, hi)
        fhi = np.where(move_hi, fmid, fhi)
    return np.where(np.abs(flo) <= np.abs(fhi), lo, hi)


@lru_cache(maxsize=8)
def _bessel_zeros_cached(order: int, n: int) -> np.ndarray:
    centre = _mcmahon(order, np.arange(1, n + 1))
    half = 0.25 * math.pi
    func = bessel_j0 if order == 0 else bessel_j1
    zeros = _bisect(func, centre - half, centre + half)
    zeros.flags.writeable = False
    return zeros


def bessel_zeros(order: int, n: int) -> np.ndarray:
    """First ``n`` positive zeros of J0 (``order=0``) or J1 (``order=1``)."""
    if order not in (0, 1):
        raise DomainError("only J0 and J1 zeros are available")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return _bessel_zeros_cached(order, int(n))


@lru_cache(maxsize=64)
def _find_roots_cached(family: Family, nu_s: float, n: int) -> CharacteristicRoots:
    c = characteristic_c(family, nu_s)

    def g(x):
        return bessel_j0(x) - c * bessel_j1_over_x(x)

    j1 = bessel_zeros(1, n)
    lo = np.concatenate(([0.0], j1[:-1]))
    hi = j1
    roots = _bisect(g, lo, hi)
    residuals = np.abs(g(roots))
    if not np.all(np.diff(roots) > 0) or roots[0] <= 0:
        raise BiphasicError("characteristic roots are not strictly increasing and positive")
    worst = int(np.argmax(residuals))
    if residuals[worst] > RESIDUAL_TOL:
        raise BiphasicError(
            f"root {worst + 1} = {roots[worst]!r} has residual {residuals[worst]:.3e} "
            f"> {RESIDUAL_TOL:g}"
        )
    roots.flags.writeable = False
    residuals.flags.writeable = False
    return CharacteristicRoots(family=family, nu_s=nu_s, c=c, roots=roots, residuals=residuals)


def find_roots(family, nu_s: float, n: int) -> CharacteristicRoots:
    """First ``n`` roots of the characteristic equation of ``family``.

    Deterministic: identical inputs give bitwise identical arrays (results
    are memoised, so they are often the very same object).
    """
    family = Family.parse(family)
    nu_s = _check_nu(nu_s)
    n = int(n)
    if not 1 <= n <= MAX_ROOTS:
        raise DomainError(f"n must be in [1, {MAX_ROOTS}], got {n}")
    return _find_roots_cached(family, nu_s, n)
