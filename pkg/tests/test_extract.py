import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualband.data import B28, B140, Mpc, Padp
from dualband.extract import count_paths, extract_mpcs, find_peaks, local_maxima
from dualband.sounder import Scene, random_scene, synthesize_padp


def _angle_err(a, b):
    return abs((a - b + 180.0) % 360.0 - 180.0)


def test_single_mpc_recovered(single_mpc_scene):
    out = extract_mpcs(synthesize_padp(single_mpc_scene), 30.0, 6.0)
    assert len(out) == 1
    m = out[0]
    assert abs(m.delay - 50e-9) <= 0.25e-9
    assert _angle_err(m.aoa_azimuth, 45.0) <= 2.5
    assert abs(m.path_gain + 80.0) <= 0.5


def test_noise_only_grid_is_empty():
    p = Padp.from_grid(B140, np.full((72, 1000), -130.0), -130.0)
    assert extract_mpcs(p, 30.0, 6.0) == []


def test_same_delay_two_angles_both_found():
    scene = Scene((Mpc(80e-9, 40.0, -85.0), Mpc(80e-9, 130.0, -85.0)), B28, 20.0)
    out = extract_mpcs(synthesize_padp(scene))
    assert len(out) == 2
    assert sorted(round(m.aoa_azimuth) for m in out) == [40, 130]


@given(st.floats(20e-9, 200e-9), st.floats(0.0, 359.99), st.floats(-100.0, -60.0))
def test_off_grid_single_mpc_accuracy(tau, phi, g):
    scene = Scene((Mpc(tau, phi, g),), B140, 10.0)
    out = extract_mpcs(synthesize_padp(scene))
    assert len(out) == 1
    assert abs(out[0].delay - tau) <= 0.25e-9
    assert _angle_err(out[0].aoa_azimuth, phi) <= 2.5
    assert abs(out[0].path_gain - g) <= 0.5


def test_parabolic_refinement_available(single_mpc_scene):
    out = extract_mpcs(synthesize_padp(single_mpc_scene), delay_refinement="parabolic")
    assert len(out) == 1
    with pytest.raises(ValueError, match="unknown delay refinement"):
        extract_mpcs(synthesize_padp(single_mpc_scene), delay_refinement="cubic")


def test_output_sorted_by_delay(rng):
    out = extract_mpcs(synthesize_padp(random_scene(B28, rng)))
    d = [m.delay for m in out]
    assert d == sorted(d)


def test_threshold_limits_dynamic_range(rng):
    p = synthesize_padp(random_scene(B28, rng, gain_range_db=20))
    peaks = find_peaks(p, threshold_db=10.0)
    top = max(q.power_db for q in peaks)
    assert all(q.power_db >= top - 10.0 for q in peaks)


def test_local_maxima_plateau_gives_one_cell():
    g = np.full((72, 20), -120.0)
    g[10, 5:8] = -80.0
    mask = local_maxima(g)
    assert np.argwhere(mask).tolist() == [[10, 5]]


def test_local_maxima_wraps_in_azimuth():
    g = np.full((72, 20), -120.0)
    g[0, 5] = -80.0
    g[71, 5] = -70.0
    mask = local_maxima(g)
    assert mask[71, 5] and not mask[0, 5]


def test_count_paths_examples():
    mpcs = [Mpc(1e-9 * i, 0.0, g) for i, g in enumerate([0.0, -10.0, -20.0, -35.0])]
    assert count_paths(mpcs, 30) == 3
    assert count_paths(mpcs, 15) == 2
    assert count_paths([], 30) == 0


def test_invalid_thresholds(single_mpc_scene):
    p = synthesize_padp(single_mpc_scene)
    with pytest.raises(ValueError):
        extract_mpcs(p, threshold_db=0.0)
    with pytest.raises(ValueError):
        extract_mpcs(p, min_snr_db=-1.0)
