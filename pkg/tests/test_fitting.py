import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from dualband.data import B28, B140
from dualband.fitting import (
    BandReport,
    ClusterPowerFit,
    PasFit,
    PasModel,
    PathlossFit,
    bessel_i0,
    bessel_i0e,
    compare_bands,
    evaluate_pathloss,
    fit_cluster_power,
    fit_pas,
    fit_pathloss,
    gaussian_pas,
    golden_section,
    von_mises_pas,
)


def test_pathloss_noiseless_recovery():
    d = np.geomspace(3, 65, 40)
    pl = 10 * 2.10 * np.log10(d) + 59.16
    fit = fit_pathloss(list(zip(d, pl)))
    assert fit.A == pytest.approx(2.10, abs=1e-9)
    assert fit.B == pytest.approx(59.16, abs=1e-9)
    assert fit.sigma == pytest.approx(0.0, abs=1e-9)


def test_pathloss_two_points():
    fit = fit_pathloss([(1.0, 60.0), (10.0, 80.0)])
    assert (fit.A, fit.B) == pytest.approx((2.0, 60.0))
    assert fit.sigma == pytest.approx(0.0, abs=1e-12)


def test_pathloss_noisy_b140():
    rng = np.random.default_rng(7)
    d = 10 ** rng.uniform(np.log10(3), np.log10(65), 1000)
    pl = 10 * 2.22 * np.log10(d) + 70.77 + rng.normal(0, 2.94, d.size)
    fit = fit_pathloss(list(zip(d, pl)))
    assert abs(fit.A - 2.22) <= 0.05
    assert abs(fit.B - 70.77) <= 0.5
    assert abs(fit.sigma - 2.94) <= 0.15


def test_pathloss_degenerate_inputs():
    with pytest.raises(ValueError):
        fit_pathloss([(5.0, 80.0)])
    with pytest.raises(ValueError):
        fit_pathloss([(5.0, 80.0), (5.0, 81.0)])


def test_evaluate_pathloss():
    fit = PathlossFit(2.10, 59.16, 2.85)
    assert evaluate_pathloss(fit, 1.0) == pytest.approx(59.16)
    assert evaluate_pathloss(fit, 10.0) == pytest.approx(80.16)
    assert evaluate_pathloss(fit, 1.0, 1.5) == pytest.approx(60.66)
    with pytest.raises(ValueError):
        evaluate_pathloss(fit, 0.0)


def test_cluster_power_fit():
    dc = np.geomspace(5, 120, 30)
    fit = fit_cluster_power(list(zip(dc, -30.5 * np.log10(dc) - 58.0)))
    assert (fit.A, fit.B) == pytest.approx((-30.5, -58.0), abs=1e-9)
    model = ClusterPowerFit(-30.5, -58.0)
    assert model(1.0) == -58.0
    assert model(10.0) == pytest.approx(-88.5)


def test_bessel_examples():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658778, abs=1e-9)
    with pytest.raises(ValueError):
        bessel_i0(-1.0)


@given(st.floats(0.0, 700.0))
def test_bessel_against_scipy(x):
    assert bessel_i0e(x) == pytest.approx(special.i0e(x), rel=1e-12)
    if x < 700:
        assert bessel_i0(x) == pytest.approx(special.i0(x), rel=1e-12)


def test_gaussian_pas_at_sigma():
    assert gaussian_pas(17.9, 17.9) == pytest.approx(math.exp(-1))


def test_von_mises_pas_matches_scipy_density():
    from scipy.stats import vonmises

    phi = np.linspace(-180, 180, 37)
    np.testing.assert_allclose(von_mises_pas(phi, 8.2), vonmises.pdf(np.deg2rad(phi), 8.2), rtol=1e-12)


def test_fit_pas_gaussian_self_consistent():
    phi = np.linspace(-60, 60, 41)
    fit = fit_pas(list(zip(phi, gaussian_pas(phi, 17.9))), "Gaussian")
    assert abs(fit.sigma_deg - 17.9) <= 0.05
    assert fit.rmse <= 1e-6


def test_fit_pas_von_mises_self_consistent():
    phi = np.linspace(-90, 90, 41)
    fit = fit_pas(list(zip(phi, von_mises_pas(phi, 8.2))), PasModel.VON_MISES)
    assert abs(fit.kappa - 8.2) <= 0.05


def test_fit_pas_degenerate():
    with pytest.raises(ValueError):
        fit_pas([(10.0, 1.0)] * 5, "Gaussian")
    with pytest.raises(ValueError):
        fit_pas([(0.0, 1.0), (10.0, 0.5)], "Gaussian")


def test_golden_section_quadratic():
    assert golden_section(lambda x: (x - 2.5) ** 2, 0, 10) == pytest.approx(2.5, abs=1e-8)
    assert golden_section(lambda x: x, 1, 3) == 1


def _report(band, ds, as_, n, m):
    return BandReport(band, mean_delay_spread=ds, mean_azimuth_spread=as_, n_stats=n, m_stats=m)


def test_compare_table_values():
    a = _report(B28, 19e-9, 33.0, (7.9, 3.6), (5.4, 6.0))
    b = _report(B140, 19e-9, 29.0, (5.9, 2.1), (3.8, 2.5))
    comp = compare_bands(a, b)
    assert comp.deltas["delay_spread_ns"] == pytest.approx(0.0)
    assert comp.deltas["azimuth_spread_deg"] == pytest.approx(4.0)
    assert comp.deltas["N_mean"] == pytest.approx(2.0)
    assert comp.deltas["M_mean"] == pytest.approx(1.6)


def test_compare_identical_reports():
    a = BandReport(B28, PathlossFit(2.1, 59.16, 2.85), ClusterPowerFit(-30.5, -58),
                   PasFit("Gaussian", 17.9, 0.01), PasFit("VonMises", 8.2, 0.08), 19e-9, 33.0, (7.9, 3.6), (5.4, 6))
    comp = compare_bands(a, a)
    assert all(v == 0 for v in comp.deltas.values())
    assert not any(comp.flags.values())


def test_compare_incomparable_bands():
    from dataclasses import replace

    narrow = replace(B140, bandwidth=2e9, delay_resolution=0.5e-9)
    with pytest.raises(ValueError, match="not comparable"):
        compare_bands(_report(B28, 1e-8, 1, (1, 0), (1, 0)), _report(narrow, 1e-8, 1, (1, 0), (1, 0)))


def test_band_report_dict_round_trip():
    a = BandReport(B28, PathlossFit(2.1, 59.16, 2.85, 8), ClusterPowerFit(-30.5, -58, 40),
                   PasFit("Gaussian", 17.9, 0.01, 40), None, 19e-9, 33.0, (7.9, 3.6), (5.4, 6.0))
    assert BandReport.from_dict(a.to_dict()) == a
