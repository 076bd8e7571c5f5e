"""Forward model of the rotating-horn channel sounder.

A :class:`Scene` of ground-truth MPCs is rendered to a PADP by sweeping the
Rx horn over the azimuth grid.  Each MPC contributes, in linear power,

    path_gain + rx_gain(pointing - aoa) + tx_gain

spread over the delay bins by the sampled squared-sinc pulse of the band.
Contributions add incoherently and a noise floor is added to every cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import gain_db
from .data import BandConfig, LosState, Mpc, Padp, azimuth_axis, delay_axis, mpc_arrays

PULSE_HALF_WIDTH = 8  # bins either side of the pulse centre
DEFAULT_N_DELAY = 1000


@dataclass(frozen=True)
class Scene:
    """Ground-truth MPCs of one link plus the sounder that observes them.

    ``n_delay`` fixes the length of the rendered delay axis; ``None`` picks
    the smallest multiple of 100 bins (at least 1000) that holds every pulse.
    ``noise_floor`` defaults to ``-band.pdp_dynamic_range``.
    """

    mpcs: tuple
    band: BandConfig
    tx_rx_distance: float
    los_state: LosState = LosState.LOS
    link_id: str = "scene"
    n_delay: int | None = None
    noise_floor: float | None = None

    def __post_init__(self):
        mpcs = tuple(self.mpcs)
        object.__setattr__(self, "mpcs", mpcs)
        object.__setattr__(self, "los_state", LosState(self.los_state))
        if not mpcs:
            raise ValueError("scene has no MPCs")
        if not all(isinstance(m, Mpc) for m in mpcs):
            raise TypeError("scene MPCs must be Mpc instances")
        if self.noise_floor is None:
            object.__setattr__(self, "noise_floor", self.band.noise_floor)
        delay, _, gain = mpc_arrays(mpcs)
        step = self.band.delay_resolution
        if self.n_delay is None:
            need = int(math.ceil(delay.max() / step)) + PULSE_HALF_WIDTH + 1
            n = max(DEFAULT_N_DELAY, int(math.ceil(need / 100.0)) * 100)
            object.__setattr__(self, "n_delay", n)
        else:
            object.__setattr__(self, "n_delay", int(self.n_delay))
        span = (self.n_delay - 1) * step
        bad = np.nonzero(delay > span * (1 + 1e-12))[0]
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"MPC {i} delay {delay[i] * 1e9:.3f} ns lies outside the delay axis "
                f"[0, {span * 1e9:.3f}] ns"
            )
        if gain.min() < gain.max() - self.band.pdp_dynamic_range:
            raise ValueError("MPC gains exceed the band's dynamic range")


def pulse_weights(frac_delay: float, n_delay: int, half_width: int = PULSE_HALF_WIDTH):
    """Bin indices and squared-sinc weights of a pulse centred at ``frac_delay`` bins.

    The pulse is ``sinc^2`` of the band-limited (rectangular spectrum)
    sounder response, sampled at the delay resolution, normalised to a peak
    of 1 and truncated at +/- ``half_width`` bins around the nearest bin.
    """
    centre = int(np.floor(frac_delay + 0.5))
    idx = np.arange(centre - half_width, centre + half_width + 1)
    idx = idx[(idx >= 0) & (idx < n_delay)]
    return idx, np.sinc(idx - frac_delay) ** 2


def render_signal(scene: Scene) -> np.ndarray:
    """Noise-free linear power grid of shape (n_azimuth, n_delay)."""
    band = scene.band
    pointings = azimuth_axis(band)
    grid = np.zeros((band.n_azimuth, scene.n_delay), dtype=float)
    tx_gain = gain_db(band.tx_antenna, 0.0, 0.0)
    for m in scene.mpcs:
        rx = gain_db(band.rx_antenna, pointings - m.aoa_azimuth, 0.0)
        az_power = 10.0 ** ((m.path_gain + rx + tx_gain) / 10.0)
        idx, w = pulse_weights(m.delay / band.delay_resolution, scene.n_delay)
        grid[:, idx] += az_power[:, None] * w[None, :]
    return grid


def synthesize_padp(scene: Scene, seed: int = 0, noise: str = "constant") -> Padp:
    """Render a synthetic PADP for ``scene``.

    Parameters
    ----------
    scene : Scene
    seed : int
        Seeds the per-cell noise draws; unused for ``noise="constant"``.
    noise : {"constant", "exponential"}
        ``"constant"`` adds the noise-floor power to every cell.
        ``"exponential"`` draws each cell's noise power from an exponential
        distribution with the floor as its mean, clipped at 20 dB below it.
    """
    signal = render_signal(scene)
    floor_lin = 10.0 ** (scene.noise_floor / 10.0)
    if noise == "constant":
        noise_power = floor_lin
    elif noise == "exponential":
        rng = np.random.default_rng(seed)
        noise_power = np.maximum(rng.exponential(floor_lin, size=signal.shape), 0.01 * floor_lin)
    else:
        raise ValueError(f"unknown noise model {noise!r}; expected 'constant' or 'exponential'")
    grid = 10.0 * np.log10(signal + noise_power)
    band = scene.band
    return Padp(
        band=band,
        link_id=scene.link_id,
        tx_rx_distance=scene.tx_rx_distance,
        los_state=scene.los_state,
        delay_axis=delay_axis(band, scene.n_delay),
        azimuth_axis=azimuth_axis(band),
        power_grid=grid,
        noise_floor=scene.noise_floor,
    )


def random_scene(band: BandConfig, rng, n_mpc: int = 20, gain_range_db: float = 20.0,
                 strongest_db=(-90.0, -60.0), delay_range=(20e-9, 230e-9),
                 min_delay_sep: float = 2.5e-9, min_angle_sep: float = 15.0,
                 link_id: str = "scene", max_tries: int = 10_000) -> Scene:
    """Random scene whose MPCs are pairwise resolvable.

    Every pair of MPCs is separated by at least ``min_delay_sep`` in delay or
    ``min_angle_sep`` in azimuth.  Gains fall within ``gain_range_db`` of the
    strongest MPC, whose gain is uniform over ``strongest_db``.  Candidates
    that violate the separation rule are redrawn; fewer than ``n_mpc`` MPCs
    are returned only if ``max_tries`` draws are exhausted.
    """
    top = rng.uniform(*strongest_db)
    delays, aoas, gains = [], [], []
    tries = 0
    while len(delays) < n_mpc and tries < max_tries:
        tries += 1
        tau = rng.uniform(*delay_range)
        phi = rng.uniform(0.0, 360.0)
        ok = True
        for t2, p2 in zip(delays, aoas):
            dphi = abs((phi - p2 + 180.0) % 360.0 - 180.0)
            if abs(tau - t2) < min_delay_sep and dphi < min_angle_sep:
                ok = False
                break
        if not ok:
            continue
        delays.append(tau)
        aoas.append(phi)
        gains.append(top if not gains else top - rng.uniform(0.0, gain_range_db))
    mpcs = tuple(Mpc(t, p, g) for t, p, g in zip(delays, aoas, gains))
    return Scene(mpcs=mpcs, band=band, tx_rx_distance=1.0, link_id=link_id)
