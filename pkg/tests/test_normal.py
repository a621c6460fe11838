import numpy as np
import pytest
from scipy import special, stats

from jointprofile.normal import (
    log_norm_cdf,
    log_norm_cdf_array,
    norm_cdf,
    norm_cdf_array,
    norm_pdf,
    norm_ppf,
    norm_ppf_upper,
    norm_sf,
)

Z = np.concatenate([np.linspace(-40, 10, 501), [-1e-3, 0.0, 1e-3, 37.0]])


def test_cdf_sf_pdf_match_scipy():
    for z in Z:
        # exp and erfc lose a few bits far out in the tails
        rel = 1e-13 if abs(z) < 10 else 1e-11
        assert norm_cdf(z) == pytest.approx(special.ndtr(z), rel=rel, abs=1e-300)
        assert norm_sf(z) == pytest.approx(stats.norm.sf(z), rel=rel, abs=1e-300)
        assert norm_pdf(z) == pytest.approx(stats.norm.pdf(z), rel=rel, abs=1e-300)
    assert np.allclose(norm_cdf_array(Z), special.ndtr(Z), rtol=1e-11, atol=1e-290)


@pytest.mark.parametrize("z", [-1e4, -200.0, -38.5, -30.0, -29.9, -10.0, -1.0, 0.0, 3.0, 9.0])
def test_log_cdf_deep_tail(z):
    assert log_norm_cdf(z) == pytest.approx(special.log_ndtr(z), rel=1e-13, abs=1e-300)
    assert log_norm_cdf_array(np.array([z]))[0] == pytest.approx(special.log_ndtr(z), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("p", [1e-300, 1e-50, 1e-10, 0.001, 0.02425, 0.1, 0.5, 0.7, 0.97575, 0.999999])
def test_ppf_matches_ndtri(p):
    assert norm_ppf(p) == pytest.approx(special.ndtri(p), rel=1e-13, abs=1e-14)
    assert norm_ppf_upper(p) == pytest.approx(-special.ndtri(p), rel=1e-13, abs=1e-14)


def test_ppf_inverts_cdf():
    for p in np.linspace(1e-6, 1 - 1e-6, 97):
        assert norm_cdf(norm_ppf(p)) == pytest.approx(p, rel=1e-12)


def test_ppf_domain():
    assert norm_ppf(0.0) == -np.inf and norm_ppf(1.0) == np.inf
    with pytest.raises(ValueError):
        norm_ppf(1.5)
