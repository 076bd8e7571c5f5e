"""Peak search and antenna-gain deconvolution on a PADP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antenna import gain_db
from .data import Mpc, Padp, wrap_deg
from .sounder import PULSE_HALF_WIDTH

# neighbour offsets (d_azimuth, d_delay); a cell must be strictly greater than
# the neighbours that precede it in (delay, azimuth) order, so a flat plateau
# yields its first cell and a plateau bounded by higher cells yields none
_NEIGHBOURS = [(da, dt) for dt in (-1, 0, 1) for da in (-1, 0, 1) if (da, dt) != (0, 0)]


@dataclass(frozen=True)
class Peak:
    """A detected grid maximum and its refined MPC."""

    az_index: int
    delay_index: int
    power_db: float
    mpc: Mpc


def local_maxima(grid: np.ndarray) -> np.ndarray:
    """Boolean mask of 8-neighbourhood maxima; azimuth (axis 0) wraps.

    Ties are broken toward smaller delay, then smaller azimuth, with azimuth
    order taken circularly.
    """
    g = np.asarray(grid, dtype=float)
    padded = np.pad(g, ((0, 0), (1, 1)), constant_values=-np.inf)
    mask = np.ones(g.shape, dtype=bool)
    n = g.shape[1]
    for da, dt in _NEIGHBOURS:
        nb = np.roll(padded, -da, axis=0)[:, 1 + dt:1 + dt + n]
        if dt < 0 or (dt == 0 and da < 0):
            mask &= g > nb
        else:
            mask &= g >= nb
    return mask


def _refine_delay(row: np.ndarray, n0: int, method: str) -> tuple[float, float]:
    """Fractional-bin offset of the pulse peak and the power ratio peak/sample.

    ``row`` holds noise-subtracted linear power along delay at the peak
    pointing.
    """
    p0 = row[n0]
    pm = row[n0 - 1] if n0 > 0 else 0.0
    pp = row[n0 + 1] if n0 + 1 < row.size else 0.0
    if method == "pulse":
        # sampled sinc^2 decays as 1/x^2, so sqrt of the neighbour ratio is
        # linear in the fractional offset
        side = 1.0 if pp >= pm else -1.0
        r = np.sqrt(min(max(pp, pm) / p0, 1.0)) if p0 > 0 else 0.0
        delta = side * r / (1.0 + r)
        return delta, 1.0 / np.sinc(delta) ** 2
    if method == "parabolic":
        tiny = p0 * 1e-30 + 1e-300
        lm, l0, lp = (10.0 * np.log10(max(v, tiny)) for v in (pm, p0, pp))
        denom = 2.0 * (2.0 * l0 - lp - lm)
        delta = (lp - lm) / denom if denom > 0 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        vertex = l0 + 0.25 * (lp - lm) * delta
        return delta, 10.0 ** ((vertex - l0) / 10.0)
    raise ValueError(f"unknown delay refinement {method!r}; expected 'pulse' or 'parabolic'")


def _refine_azimuth(col: np.ndarray, k0: int, step: float, hpbw: float, omni: bool) -> float:
    """Offset (deg) of the AoA from pointing ``k0`` using the Rx pattern.

    Log power across the main lobe is quadratic with curvature fixed by the
    beamwidth, so the imbalance of the two adjacent pointings gives the
    offset directly.  The result is clipped to half a step.
    """
    if omni:
        return 0.0
    n = col.size
    p0 = col[k0]
    if p0 <= 0:
        return 0.0
    tiny = p0 * 1e-30
    lm = 10.0 * np.log10(max(col[(k0 - 1) % n], tiny))
    lp = 10.0 * np.log10(max(col[(k0 + 1) % n], tiny))
    delta = hpbw ** 2 * (lp - lm) / (48.0 * step)
    return float(np.clip(delta, -0.5 * step, 0.5 * step))


def _explained_power(kept, k, n, padp, tx_gain):
    """Linear power the already accepted peaks put into cell (k, n)."""
    band = padp.band
    phi = padp.azimuth_axis[k]
    total = 0.0
    for q in kept:
        frac = q.mpc.delay / band.delay_resolution
        if abs(n - np.floor(frac + 0.5)) > PULSE_HALF_WIDTH:
            continue
        g = q.mpc.path_gain + gain_db(band.rx_antenna, phi - q.mpc.aoa_azimuth, 0.0) + tx_gain
        total += 10.0 ** (g / 10.0) * np.sinc(n - frac) ** 2
    return total


def find_peaks(padp: Padp, threshold_db: float = 30.0, min_snr_db: float = 6.0,
               delay_refinement: str = "pulse",
               explained_margin_db: float | None = 3.0) -> list[Peak]:
    """Detect and refine the MPC peaks of a PADP.

    See :func:`extract_mpcs`; this variant also returns the grid cell of
    every peak.  Peaks are ordered by descending grid power.
    """
    if not threshold_db > 0:
        raise ValueError(f"threshold_db must be positive, got {threshold_db}")
    if not min_snr_db >= 0:
        raise ValueError(f"min_snr_db must be non-negative, got {min_snr_db}")
    grid = padp.power_grid
    gmax = float(grid.max())
    if gmax < padp.noise_floor + min_snr_db:
        return []
    band = padp.band
    mask = local_maxima(grid)
    mask &= grid >= gmax - threshold_db
    mask &= grid >= padp.noise_floor + min_snr_db
    ks, ns = np.nonzero(mask)
    order = sorted(range(ks.size), key=lambda i: (-grid[ks[i], ns[i]], ns[i], ks[i]))

    signal = np.maximum(10.0 ** (grid / 10.0) - 10.0 ** (padp.noise_floor / 10.0), 0.0)
    rx = band.rx_antenna
    tx_gain = gain_db(band.tx_antenna, 0.0, 0.0)
    step_t = band.delay_resolution
    step_a = band.azimuth_step

    kept: list[Peak] = []
    for i in order:
        k0, n0 = int(ks[i]), int(ns[i])
        d_bin, pulse_scale = _refine_delay(signal[k0], n0, delay_refinement)
        d_az = _refine_azimuth(signal[:, n0], k0, step_a, rx.hpbw_azimuth, rx.azimuth_omni)
        delay = float(padp.delay_axis[n0]) + d_bin * step_t
        aoa = wrap_deg(float(padp.azimuth_axis[k0]) + d_az)
        p_lin = signal[k0, n0] * pulse_scale
        if p_lin <= 0:
            continue
        if explained_margin_db is not None and kept:
            leak = _explained_power(kept, k0, n0, padp, tx_gain)
            if signal[k0, n0] < leak * 10.0 ** (explained_margin_db / 10.0):
                continue
        gain = 10.0 * np.log10(p_lin) - gain_db(rx, -d_az, 0.0) - tx_gain
        mpc = Mpc(max(delay, 0.0), aoa, min(gain, 0.0))
        dup = False
        for q in kept:
            dphi = abs((mpc.aoa_azimuth - q.mpc.aoa_azimuth + 180.0) % 360.0 - 180.0)
            if abs(mpc.delay - q.mpc.delay) <= step_t and dphi <= step_a:
                dup = True
                break
        if not dup:
            kept.append(Peak(k0, n0, float(grid[k0, n0]), mpc))
    return kept


def extract_mpcs(padp: Padp, threshold_db: float = 30.0, min_snr_db: float = 6.0,
                 delay_refinement: str = "pulse",
                 explained_margin_db: float | None = 3.0) -> list[Mpc]:
    """Extract antenna-deconvolved MPCs from a PADP.

    A peak is an 8-neighbourhood local maximum of the dB grid (azimuth wraps)
    that lies within ``threshold_db`` of the global maximum and at least
    ``min_snr_db`` above the noise floor.  Delay is refined across the
    adjacent delay bins, azimuth from the adjacent pointings through the Rx
    pattern, and the path gain is the refined peak power minus the Rx
    boresight gain and the Tx gain toward the Rx.  Of two peaks within one
    delay bin and one azimuth step, only the stronger survives.

    Peaks are accepted strongest first.  A candidate whose power does not
    exceed, by ``explained_margin_db``, the power that the accepted peaks
    deposit in its cell through the Rx pattern and the delay pulse is
    rejected as leakage (sidelobe floor crossing another path's delay tail).

    Parameters
    ----------
    padp : Padp
    threshold_db : float
        Dynamic range below the strongest peak, e.g. 30.
    min_snr_db : float
        Minimum height above the noise floor.
    delay_refinement : {"pulse", "parabolic"}
        ``"pulse"`` inverts the sampled squared-sinc pulse exactly;
        ``"parabolic"`` fits a parabola to the three dB samples.
    explained_margin_db : float or None
        Leakage rejection margin; ``None`` disables the check.

    Returns
    -------
    list of Mpc
        Sorted by ascending delay.  Empty for a noise-only grid.
    """
    peaks = find_peaks(padp, threshold_db, min_snr_db, delay_refinement, explained_margin_db)
    return sorted((p.mpc for p in peaks), key=lambda m: (m.delay, m.aoa_azimuth))


def count_paths(mpcs, threshold_db: float) -> int:
    """Number of MPCs whose gain is within ``threshold_db`` of the strongest."""
    gains = np.array([m.path_gain for m in mpcs], dtype=float)
    if gains.size == 0:
        return 0
    return int(np.count_nonzero(gains >= gains.max() - threshold_db))
