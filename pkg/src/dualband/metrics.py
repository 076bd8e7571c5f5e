"""Large-scale channel parameters computed from MPC lists."""

from __future__ import annotations

import math

import numpy as np

from .data import SPEED_OF_LIGHT, LinkStats, mpc_arrays
from .extract import count_paths

# sqrt(-2 ln|R|) grows without bound as |R| -> 0; the spread is capped at
# sqrt(2*pi) rad = 180 * sqrt(2/pi) deg, reached when |R| = exp(-pi)
AZIMUTH_SPREAD_CAP_DEG = 180.0 * math.sqrt(2.0 / math.pi)


def friis_fspl(distance: float, frequency: float) -> float:
    """Free-space pathloss ``20 log10(4 pi d f / c)`` in dB."""
    if not (distance > 0 and frequency > 0):
        raise ValueError(f"distance and frequency must be positive, got {distance}, {frequency}")
    return 20.0 * math.log10(4.0 * math.pi * distance * frequency / SPEED_OF_LIGHT)


def _powers(mpcs):
    delay, aoa, gain = mpc_arrays(mpcs)
    if gain.size == 0:
        raise ValueError("no paths")
    return delay, aoa, gain


def threshold_mpcs(mpcs, threshold_db: float):
    """MPCs within ``threshold_db`` of the strongest one, order preserved."""
    mpcs = list(mpcs)
    if not mpcs:
        return []
    top = max(m.path_gain for m in mpcs)
    return [m for m in mpcs if m.path_gain >= top - threshold_db]


def omni_pathloss(mpcs, threshold_db: float = 30.0) -> float:
    """Omni-directional pathloss from antenna-deconvolved path gains.

    ``-10 log10(sum 10^(g/10))`` over the MPCs within ``threshold_db`` of the
    strongest path.
    """
    _, _, gain = _powers(mpcs)
    top = gain.max()
    kept = gain[gain >= top - threshold_db]
    # factor out the strongest path to keep the sum well scaled
    return float(-(top + 10.0 * np.log10(np.sum(10.0 ** ((kept - top) / 10.0)))))


def rms_delay_spread(mpcs) -> float:
    """Power-weighted RMS delay spread in seconds."""
    delay, _, gain = _powers(mpcs)
    p = 10.0 ** ((gain - gain.max()) / 10.0)
    w = p / p.sum()
    t = delay - delay.min()
    mean = w @ t
    var = w @ (t - mean) ** 2
    return float(math.sqrt(max(var, 0.0)))


def azimuth_spread(mpcs) -> float:
    """Circular azimuth spread ``sqrt(-2 ln|R|)`` in degrees.

    ``R`` is the power-weighted mean resultant vector of the AoAs.  The value
    is capped at :data:`AZIMUTH_SPREAD_CAP_DEG` (about 143.6 deg), which also
    covers the perfectly balanced case ``|R| = 0``.
    """
    _, aoa, gain = _powers(mpcs)
    p = 10.0 ** ((gain - gain.max()) / 10.0)
    w = p / p.sum()
    # angles relative to the strongest path, so coincident paths give exactly 0
    d = np.deg2rad(aoa - aoa[np.argmax(gain)])
    z = np.sum(w * np.exp(1j * d))
    if abs(z) <= math.exp(-math.pi):
        return AZIMUTH_SPREAD_CAP_DEG
    # 1 - |R| as a sum of squares stays accurate for small spreads
    one_minus_r = float(np.sum(w * 2.0 * np.sin((d - np.angle(z)) / 2.0) ** 2))
    if one_minus_r <= 0.0:
        return 0.0
    return float(np.rad2deg(math.sqrt(-2.0 * math.log1p(-one_minus_r))))


def circular_mean_deg(aoa, weights) -> float:
    z = np.sum(np.asarray(weights) * np.exp(1j * np.deg2rad(aoa)))
    return float(np.rad2deg(np.angle(z)) % 360.0)


def link_stats(mpcs, band=None, distance=None, link_id: str = "link",
               threshold_db: float = 30.0) -> LinkStats:
    """Pathloss, spreads and path counts of one link.

    Spreads and pathloss use the MPCs within ``threshold_db`` of the
    strongest path.  ``band`` and ``distance`` are accepted for symmetry with
    the CLI and are not needed by the computation.
    """
    mpcs = list(mpcs)
    if not mpcs:
        raise ValueError("no paths")
    kept = threshold_mpcs(mpcs, threshold_db)
    return LinkStats(
        link_id=link_id,
        omni_pathloss=omni_pathloss(mpcs, threshold_db),
        delay_spread=rms_delay_spread(kept),
        azimuth_spread=azimuth_spread(kept),
        n_paths_30db=count_paths(mpcs, 30.0),
        n_paths_15db=count_paths(mpcs, 15.0),
    )
