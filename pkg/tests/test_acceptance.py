"""Acceptance suite: one PASS/FAIL line per criterion.

Lines are printed as each criterion runs (visible with ``-s``), collected in
the terminal summary of any pytest run, and printed when the file is run as
a script.
"""

import math

import numpy as np
import pytest
from helpers import cartilage

from scipy import special

from biphasic.charroots import bessel_zeros, characteristic_c, find_roots
from biphasic.kernels import (
    creep_M,
    invert_laplace_with_error,
    laplace_K,
    laplace_M,
    prony_M,
    relaxation_K,
    short_time_K,
    short_time_M,
)
from biphasic.material import build_spectrum, derive_constants, spectrum_from_nu
from biphasic.moduli import (
    incomplete_quadrature,
    incomplete_storage_K,
    incomplete_storage_M,
    sqrt_sine_integral,
    storage_gap_K,
)
from biphasic.response import (
    LoadingProtocol,
    ProtocolKind,
    convolve_oracle,
    input_value,
    oracle_response,
    respond,
)

RESULTS = {}


def report(number, title, passed, detail):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    return passed


def talbot_contour(m=21, t=1.0):
    theta = np.arange(1, m) * math.pi / m
    r = 2.0 * m / (5.0 * t)
    return r * theta * (1.0 / np.tan(theta) + 1j)


def test_criterion_1_laplace_reciprocity():
    s = np.concatenate([np.geomspace(1e-3, 1e6, 50), talbot_contour()])
    worst = 0.0
    for nu in (0.0, 0.25, 0.499):
        worst = max(worst, float(np.max(np.abs(s * s * laplace_K(s, nu) * laplace_M(s, nu) - 1.0))))
    assert report(1, "s^2 K_bar M_bar = 1", worst < 1e-10, f"max deviation {worst:.2e} < 1e-10 over 70 points x 3 nu")


def test_criterion_2_series_vs_inversion():
    worst = 0.0
    for nu in (0.0, 0.3, 0.499):
        spec = spectrum_from_nu(nu)
        for t in np.geomspace(1e-2, 10.0, 25):
            for series, transform in ((relaxation_K, laplace_K), (creep_M, laplace_M)):
                inv = invert_laplace_with_error(lambda z: transform(z, nu), t)
                worst = max(worst, abs(series(t, spec, dimensional=False).value - inv.value))
    assert report(2, "series kernels vs inverse Laplace", worst < 1e-6, f"max |diff| {worst:.2e} < 1e-6, t_hat in [1e-2, 10]")


def test_criterion_3_sum_identities():
    ok, worst = True, 0.0
    for nu in (-0.5, 0.0, 0.25, 0.3, 0.45, 0.499):
        s100, s400 = spectrum_from_nu(nu, 1.0, 100), spectrum_from_nu(nu, 1.0, 400)
        for attr in ("sum_A_remainder", "sum_B_remainder"):
            r100, r400 = abs(getattr(s100, attr)), abs(getattr(s400, attr))
            worst = max(worst, r400)
            ok &= r400 < 1e-3 and r400 < r100
    assert report(3, "sum identities converge", ok, f"max deviation at N=400 {worst:.2e} < 1e-3, below N=100 for all nu")


def test_criterion_4_short_time_scaling():
    ts = 2.0 ** -np.arange(6, 15)
    lo, hi = math.inf, -math.inf
    for nu in (0.0, 0.2, 0.45):
        spec = spectrum_from_nu(nu)
        for series, approx in ((relaxation_K, short_time_K), (creep_M, short_time_M)):
            err = np.array([abs(series(t, spec, dimensional=False).value - approx(t, nu)) for t in ts])
            ratios = err[:-1] / err[1:]
            lo, hi = min(lo, ratios.min()), max(hi, ratios.max())
    ok = 1.5 <= lo and hi <= 2.5
    assert report(4, "two-term short-time error is O(t_hat)", ok, f"error ratios in [{lo:.3f}, {hi:.3f}] within [1.5, 2.5]")


def test_criterion_5_incomplete_moduli():
    worst, ok_gap = 0.0, True
    for nu in (0.0, 0.3, 0.499):
        spec = spectrum_from_nu(nu, 1.0, 100)
        for omega in np.geomspace(1e-2, 1e3, 20) / spec.rho[0]:
            worst = max(worst, abs(incomplete_storage_K(omega, spec) - incomplete_quadrature(omega, spec, "K")))
            worst = max(worst, abs(incomplete_storage_M(omega, spec) - incomplete_quadrature(omega, spec, "M")))
    for nu in (0.0, 0.3):
        spec = spectrum_from_nu(nu)
        C = spec.K0 - 1.0  # fixed once: sum of all A_n
        # below w rho1 ~ 0.0021 the factor exp(-pi/(2 w rho1)) underflows a double
        for x in np.geomspace(2.5e-3, 0.1, 20):
            gap = storage_gap_K(x / spec.rho[0], spec)
            ok_gap &= 0 < gap <= C * x * math.exp(-math.pi / (2 * x))
    ok = worst < 1e-8 and ok_gap
    assert report(5, "incomplete moduli closed form vs quadrature", ok,
                  f"max |diff| {worst:.2e} < 1e-8; 0 < K1 - K1_tilde <= (K0-1) w rho1 exp(-pi/(2 w rho1)): {ok_gap}")


def test_criterion_6_high_frequency_law():
    worst = 0.0
    for nu in (0.0, 0.3, 0.45):
        p = cartilage(nu)
        nu_s, H_A, _, _ = derive_constants(p)
        spec = build_spectrum(p)
        omega = 1e4 / spec.rho[0]
        n = spec.n_terms
        while True:
            use = spec.with_terms(n)
            Kt, bound = incomplete_storage_K(omega, use, with_bound=True)
            diff = use.K0 - Kt
            if bound < 0.01 * diff or n >= 10_000:
                break
            n = min(10_000, 2 * n)
        assert bound < 0.01 * diff
        predicted = sqrt_sine_integral() * (1 - 2 * nu_s) / (math.sqrt(math.pi) * (1 - nu_s**2)) * math.sqrt(H_A * p.k_perm / p.radius_a**2)
        worst = max(worst, abs(diff * math.sqrt(omega) / predicted - 1.0))
    assert report(6, "high-frequency sqrt law at w rho1 = 1e4", worst < 0.02, f"max relative deviation {worst:.2%} < 2%")


def _protocol(kind, omega):
    amp = 1e-5 if kind.displacement_driven else 2.0
    return LoadingProtocol(kind, omega, amp, 0.0 if kind.halfsine else 0.5 * amp)


def test_criterion_7_responses():
    worst_oracle, worst_snap, worst_elastic = 0.0, 0.0, 0.0
    for nu in (0.0, 0.3, 0.499):
        p = cartilage(nu)
        spec = build_spectrum(p)
        for x in (0.1, 1.0, 10.0):
            for kind in ProtocolKind:
                proto = _protocol(kind, x / spec.rho[0])
                end = math.pi / proto.omega if kind.halfsine else 2 * proto.period
                t = np.linspace(0.0, end, 50)
                closed = respond(t, proto, p, spec)
                oracle = np.array([oracle_response(ti, proto, p, spec) for ti in t])
                worst_oracle = max(worst_oracle, np.max(np.abs(closed - oracle)) / np.max(np.abs(oracle)))
            for kind, modulus, unit in (
                (ProtocolKind.HALFSINE_DISPLACEMENT, incomplete_storage_K, p.stiffness),
                (ProtocolKind.HALFSINE_FORCE, incomplete_storage_M, 1 / p.stiffness),
            ):
                proto = _protocol(kind, x / spec.rho[0])
                snap = unit * proto.amplitude * modulus(proto.omega, spec)
                worst_snap = max(worst_snap, abs(respond(proto.peak_time, proto, p, spec) / snap - 1.0))
    p = cartilage(0.5)
    spec = build_spectrum(p)
    for kind in ProtocolKind:
        proto = _protocol(kind, 3.0)
        t = np.linspace(0.0, math.pi / 3.0 if kind.halfsine else 2 * proto.period, 50)
        exact = input_value(t, proto) * (p.stiffness if kind.displacement_driven else 1 / p.stiffness)
        worst_elastic = max(worst_elastic, np.max(np.abs(respond(t, proto, p, spec) - exact)) / np.max(np.abs(exact)))
    ok = worst_oracle < 1e-6 and worst_snap < 1e-10 and worst_elastic < 1e-12
    assert report(7, "protocol responses", ok,
                  f"oracle {worst_oracle:.1e} < 1e-6, snapshots {worst_snap:.1e} < 1e-10, elastic {worst_elastic:.1e} < 1e-12")


def test_criterion_8_round_trip():
    worst = 0.0
    for nu in (0.0, 0.3):
        p = cartilage(nu)
        spec = build_spectrum(p, 400)
        w = 1.0 / spec.rho[0]
        proto = LoadingProtocol(ProtocolKind.CYCLIC_DISPLACEMENT, w, 1e-5)  # w(t) = w0 (1 - cos wt), smooth
        h = 1e-6 / w

        def dF(s):
            lo = max(s - h, 0.0)
            return (respond(s + h, proto, p, spec) - respond(lo, proto, p, spec)) / (s + h - lo)

        for t in np.linspace(0.1, 2.0, 8) * proto.period:
            back = convolve_oracle(lambda u: prony_M(u, spec), dF, t, tol=1e-7 * p.stiffness * proto.amplitude) / p.stiffness
            target = input_value(t, proto)
            worst = max(worst, abs(back - target) / (2 * proto.amplitude))
    assert report(8, "w -> F -> w round trip", worst < 1e-4, f"max relative error {worst:.1e} < 1e-4")


def test_criterion_9_root_quality():
    ok, worst = True, 0.0
    for nu in (-0.9, -0.5, 0.0, 0.2, 0.3, 0.45, 0.499):
        a = find_roots("alpha", nu, 200).roots
        b = find_roots("beta", nu, 201).roots
        for fam, roots in (("alpha", a), ("beta", b[:200])):
            c = characteristic_c(fam, nu)
            res = np.abs(special.j0(roots) - c * special.j1(roots) / roots)
            worst = max(worst, float(res.max()))
        j0 = bessel_zeros(0, 200)
        j1 = np.concatenate([[0.0], bessel_zeros(1, 199)])
        ok &= bool(np.all(j1 < a) and np.all(a <= j0) and np.all(j1 < b[:200]) and np.all(b[:200] <= a) and np.all(a < b[1:]))
    ok &= worst < 1e-12
    assert report(9, "root residuals and interlacing", ok, f"max residual {worst:.1e} < 1e-12; interlacing holds: {ok}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, func in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                func()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
