import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biphasic.charroots import find_roots
from biphasic.errors import DomainError, ValidationError
from biphasic.material import (
    MaterialParams,
    build_spectrum,
    coefficient_A,
    coefficient_B,
    derive_constants,
    instantaneous_compliance,
    instantaneous_modulus,
    load_material,
    material_from_dict,
    nondimensionalize_force,
    nondimensionalize_time,
    spectrum_from_nu,
)

NU_GRID = [-0.5, 0.0, 0.1, 0.3, 0.45, 0.499]


@pytest.fixture
def plug():
    return MaterialParams(mu_s=0.25e6, lambda_s=0.25e6, k_perm=1e-15, radius_a=3e-3, height_h=1e-3)


class TestDerivedConstants:
    def test_zero_lambda(self):
        c = derive_constants(MaterialParams(1.0, 0.0, 1.0, 1.0, 1.0))
        assert (c.nu_s, c.H_A, c.E_s) == (0.0, 2.0, 2.0)

    def test_equal_lame(self):
        c = derive_constants(MaterialParams(1.0, 1.0, 1.0, 1.0, 1.0))
        assert c.nu_s == 0.25 and c.H_A == 3.0 and c.E_s == 2.5

    def test_gel_time(self, plug):
        assert plug.t_g == pytest.approx(12000.0, rel=1e-14)

    def test_incompressible_limit(self):
        p = MaterialParams(1.0, math.inf, 1.0, 1.0, 1.0)
        assert p.nu_s == 0.5 and p.t_g == 0.0 and p.E_s == 3.0

    @given(st.floats(min_value=1e3, max_value=1e8), st.floats(min_value=-0.99, max_value=0.499))
    def test_young_round_trip(self, E, nu):
        p = MaterialParams.from_young(E, nu, 1e-15, 1e-3, 1e-3)
        assert p.E_s == pytest.approx(E, rel=1e-12)
        assert p.nu_s == pytest.approx(nu, rel=1e-10, abs=1e-12)


class TestNondimensionalize:
    def test_time_unit(self, plug):
        assert nondimensionalize_time(plug.t_g, plug) == 1.0

    def test_time_half(self, plug):
        assert nondimensionalize_time(6000.0, plug) == pytest.approx(0.5, rel=1e-14)

    def test_force_unit(self, plug):
        F = math.pi * plug.radius_a**2 * plug.mu_s
        assert nondimensionalize_force(F, plug) == pytest.approx(1.0, rel=1e-15)


class TestValidation:
    def test_collects_all_failures(self):
        with pytest.raises(ValidationError) as info:
            MaterialParams(-1.0, 0.0, 0.0, -2.0, math.nan)
        assert len(info.value.failures) == 4

    def test_lambda_bound(self):
        with pytest.raises(ValidationError, match="lambda_s"):
            MaterialParams(3.0, -2.0, 1.0, 1.0, 1.0)

    def test_young_bad_nu(self):
        with pytest.raises(ValidationError, match="nu_s"):
            MaterialParams.from_young(1e6, 0.6, 1e-15, 1e-3, 1e-3)


class TestCoefficients:
    def test_incompressible_zero(self):
        assert coefficient_A(0.5, 3.7) == 0.0
        assert coefficient_B(0.5, 3.7) == 0.0

    def test_direct_substitution(self):
        assert coefficient_A(0.0, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-15)
        assert coefficient_B(0.0, 2.0) == pytest.approx(1.0 / 7.0, rel=1e-15)

    # Residues of the Laplace-domain kernels at their poles s = -root^2,
    # evaluated with mpmath at 40 digits by a small contour integral.
    @pytest.mark.parametrize(
        "nu,A1,B1",
        [(0.0, 0.41841744438581107, 0.29665129832039676), (0.3, 0.11872048066927718, 0.10668626610264367)],
    )
    def test_residue_oracle(self, nu, A1, B1):
        a = find_roots("alpha", nu, 1).roots[0]
        b = find_roots("beta", nu, 1).roots[0]
        assert coefficient_A(nu, a) == pytest.approx(A1, rel=1e-12)
        assert coefficient_B(nu, b) == pytest.approx(B1, rel=1e-12)

    def test_vectorised(self):
        a = find_roots("alpha", 0.3, 5).roots
        assert np.allclose(coefficient_A(0.3, a), [coefficient_A(0.3, x) for x in a], rtol=0, atol=0)

    def test_domain(self):
        with pytest.raises(DomainError):
            coefficient_A(0.3, -1.0)
        with pytest.raises(DomainError):
            coefficient_B(0.7, 2.0)


class TestSpectrum:
    def test_incompressible(self):
        s = spectrum_from_nu(0.5, 1.0, 20)
        assert np.all(s.coeff_A == 0) and np.all(s.coeff_B == 0)
        assert np.all(s.rho > 0) and np.all(s.tau > 0)

    @pytest.mark.parametrize("nu", NU_GRID)
    def test_sum_identities_converge(self, nu):
        small, large = spectrum_from_nu(nu, 1.0, 100), spectrum_from_nu(nu, 1.0, 400)
        for attr, bound in (("sum_A_remainder", "sum_A_tail"), ("sum_B_remainder", "sum_B_tail")):
            r_small, r_large = getattr(small, attr), getattr(large, attr)
            assert abs(r_large) < 1e-3
            assert abs(r_large) < abs(r_small)
            # omitted terms are positive and below the analytic bound
            assert 0 <= r_large <= getattr(large, bound)

    @pytest.mark.parametrize("nu", NU_GRID)
    def test_positive_coefficients(self, nu):
        assert spectrum_from_nu(nu, 1.0, 200).coefficients_nonnegative

    @pytest.mark.parametrize("nu", [0.0, 0.3])
    def test_ratio_decay(self, nu):
        s = spectrum_from_nu(nu, 1.0, 60)
        n = 49
        assert s.coeff_A[n + 1] / s.coeff_A[n] == pytest.approx((s.alpha[n] / s.alpha[n + 1]) ** 2, rel=0.05)
        assert s.coeff_B[n + 1] / s.coeff_B[n] == pytest.approx((s.beta[n] / s.beta[n + 1]) ** 2, rel=0.05)

    def test_time_constants_scale(self, plug):
        s = build_spectrum(plug, 10)
        assert np.allclose(s.rho, plug.t_g / s.alpha**2, rtol=1e-15)
        assert np.all(s.tau >= s.rho)  # beta_n <= alpha_n

    def test_closed_form_instants(self):
        assert instantaneous_modulus(0.0) == 1.5
        assert instantaneous_compliance(0.5) == 1.0

    def test_with_terms(self):
        s = spectrum_from_nu(0.3, 1.0, 50)
        t = s.with_terms(80)
        assert t.n_terms == 80
        assert np.array_equal(t.alpha[:50], s.alpha)


class TestConfig:
    def test_young_file(self, material_file):
        p = load_material(material_file)
        assert p.nu_s == pytest.approx(0.3, abs=1e-15)
        assert p.E_s == pytest.approx(1e6, rel=1e-15)

    def test_lame_record(self):
        p = material_from_dict({"mu_s_pa": 1.0, "lambda_s_pa": 1.0, "k_perm": 1.0, "radius_m": 1.0, "height_m": 1.0})
        assert p.nu_s == 0.25

    def test_to_dict_round_trip(self, plug):
        assert material_from_dict(plug.to_dict()) == plug

    def test_errors_name_fields(self):
        with pytest.raises(ValidationError) as info:
            material_from_dict({"E_s_pa": "soft", "mu_s_pa": 1.0, "radius_m": 1.0, "colour": 3})
        text = " ".join(info.value.failures)
        for name in ("k_perm", "height_m", "colour", "either"):
            assert name in text

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="invalid JSON"):
            load_material(path)
        path.write_text(json.dumps([1, 2]))
        with pytest.raises(ValidationError, match="object"):
            load_material(path)
