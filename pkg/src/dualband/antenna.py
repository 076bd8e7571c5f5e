"""Parametric antenna gain model."""

from __future__ import annotations

import numpy as np

from .data import AntennaPattern, wrap_offset_deg


def gain_db(pattern: AntennaPattern, az_offset, el_offset=0.0):
    """Antenna gain in dBi at an angular offset from boresight.

    Parabolic main lobe ``G0 - 12 (az/hpbw_az)^2 - 12 (el/hpbw_el)^2``,
    floored at ``G0 + sidelobe_floor``.  The -3 dB point therefore sits at
    half the beamwidth.  Azimuth-omni patterns ignore ``az_offset``.

    Parameters
    ----------
    pattern : AntennaPattern
    az_offset, el_offset : float or array_like
        Offsets in degrees; wrapped to (-180, 180] before evaluation.

    Returns
    -------
    float or ndarray
        Gain in dBi, broadcast over the offsets.
    """
    az = np.asarray(wrap_offset_deg(az_offset), dtype=float)
    el = np.asarray(wrap_offset_deg(el_offset), dtype=float)
    loss = 12.0 * (el / pattern.hpbw_elevation) ** 2
    if not pattern.azimuth_omni:
        loss = loss + 12.0 * (az / pattern.hpbw_azimuth) ** 2
    else:
        loss = loss + np.zeros_like(az)
    g = pattern.boresight_gain - np.minimum(loss, -pattern.sidelobe_floor)
    if g.ndim == 0:
        return float(g)
    return g


def gain_lin(pattern: AntennaPattern, az_offset, el_offset=0.0):
    """Linear power gain, same conventions as :func:`gain_db`."""
    return 10.0 ** (np.asarray(gain_db(pattern, az_offset, el_offset)) / 10.0)
