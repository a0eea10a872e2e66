import json

import pytest

from helpers import cartilage

from biphasic.material import build_spectrum


@pytest.fixture
def material_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"E_s_pa": 1.0e6, "nu_s": 0.3, "k_perm": 1.0e-15, "radius_m": 3.0e-3, "height_m": 1.0e-3}))
    return path


@pytest.fixture(scope="session")
def spectra():
    cache = {}

    def get(nu_s, n_terms=200):
        key = (nu_s, n_terms)
        if key not in cache:
            p = cartilage(nu_s)
            cache[key] = (p, build_spectrum(p, n_terms))
        return cache[key]

    return get


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
