"""Core domain types shared by the whole toolkit.

Angles are stored in degrees, powers in dB, delays in seconds and distances
in metres.  Every type is an immutable value object.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class BandLabel(str, enum.Enum):
    B28 = "B28"
    B140 = "B140"


class LosState(str, enum.Enum):
    LOS = "LOS"
    OLOS = "OLOS"


def wrap_deg(angle):
    """Wrap an angle (or array of angles) to [0, 360)."""
    out = np.mod(angle, 360.0)
    # np.mod(-1e-20, 360) rounds to 360.0
    out = np.where(out >= 360.0, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def wrap_offset_deg(angle):
    """Wrap an angle offset (or array) to (-180, 180]."""
    out = 180.0 - np.mod(180.0 - np.asarray(angle, dtype=float), 360.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _close(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)


@dataclass(frozen=True)
class AntennaPattern:
    """Parametric antenna description.

    The pattern is a parabolic-in-dB main lobe with a hard sidelobe floor;
    see :func:`dualband.antenna.gain_db`.
    """

    boresight_gain: float
    hpbw_azimuth: float
    hpbw_elevation: float
    azimuth_omni: bool = False
    sidelobe_floor: float = -30.0

    def __post_init__(self):
        for name in ("hpbw_azimuth", "hpbw_elevation"):
            value = getattr(self, name)
            if not 0.0 < value <= 360.0:
                raise ValueError(f"{name} must be in (0, 360], got {value}")
        if not self.sidelobe_floor < 0.0:
            raise ValueError(f"sidelobe_floor must be negative, got {self.sidelobe_floor}")

    def to_dict(self) -> dict:
        return {
            "boresight_gain": self.boresight_gain,
            "hpbw_azimuth": self.hpbw_azimuth,
            "hpbw_elevation": self.hpbw_elevation,
            "azimuth_omni": self.azimuth_omni,
            "sidelobe_floor": self.sidelobe_floor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AntennaPattern":
        return cls(
            boresight_gain=float(d["boresight_gain"]),
            hpbw_azimuth=float(d["hpbw_azimuth"]),
            hpbw_elevation=float(d["hpbw_elevation"]),
            azimuth_omni=bool(d["azimuth_omni"]),
            sidelobe_floor=float(d["sidelobe_floor"]),
        )


HORN_RX = AntennaPattern(19.0, 10.0, 40.0, azimuth_omni=False, sidelobe_floor=-30.0)
BICONE_TX = AntennaPattern(0.0, 360.0, 60.0, azimuth_omni=True, sidelobe_floor=-20.0)


@dataclass(frozen=True)
class BandConfig:
    """Sounder configuration of one frequency band."""

    band_label: BandLabel
    center_frequency: float
    bandwidth: float
    tx_power: float
    pdp_dynamic_range: float
    delay_resolution: float
    azimuth_step: float
    tx_antenna: AntennaPattern = BICONE_TX
    rx_antenna: AntennaPattern = HORN_RX
    tx_height: float | None = None
    rx_height: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "band_label", BandLabel(self.band_label))
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.center_frequency > 0:
            raise ValueError(f"center_frequency must be positive, got {self.center_frequency}")
        expected = 1.0 / self.bandwidth
        if not math.isclose(self.delay_resolution, expected, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(
                f"delay_resolution {self.delay_resolution!r} s does not equal "
                f"1/bandwidth = {expected!r} s"
            )
        if not self.azimuth_step > 0:
            raise ValueError(f"azimuth_step must be positive, got {self.azimuth_step}")
        ratio = 360.0 / self.azimuth_step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"azimuth_step {self.azimuth_step} does not divide 360")

    @property
    def n_azimuth(self) -> int:
        return int(round(360.0 / self.azimuth_step))

    @property
    def noise_floor(self) -> float:
        """Default noise floor in channel-gain dB (minus the PDP dynamic range)."""
        return -self.pdp_dynamic_range

    def to_dict(self) -> dict:
        return {
            "band_label": self.band_label.value,
            "center_frequency": self.center_frequency,
            "bandwidth": self.bandwidth,
            "tx_power": self.tx_power,
            "pdp_dynamic_range": self.pdp_dynamic_range,
            "delay_resolution": self.delay_resolution,
            "azimuth_step": self.azimuth_step,
            "tx_antenna": self.tx_antenna.to_dict(),
            "rx_antenna": self.rx_antenna.to_dict(),
            "tx_height": self.tx_height,
            "rx_height": self.rx_height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BandConfig":
        def opt(key):
            v = d.get(key)
            return None if v is None else float(v)

        return cls(
            band_label=BandLabel(d["band_label"]),
            center_frequency=float(d["center_frequency"]),
            bandwidth=float(d["bandwidth"]),
            tx_power=float(d["tx_power"]),
            pdp_dynamic_range=float(d["pdp_dynamic_range"]),
            delay_resolution=float(d["delay_resolution"]),
            azimuth_step=float(d["azimuth_step"]),
            tx_antenna=AntennaPattern.from_dict(d["tx_antenna"]),
            rx_antenna=AntennaPattern.from_dict(d["rx_antenna"]),
            tx_height=opt("tx_height"),
            rx_height=opt("rx_height"),
        )


def _band(label, fc, ptx, dr):
    bw = 4e9
    return BandConfig(
        band_label=label,
        center_frequency=fc,
        bandwidth=bw,
        tx_power=ptx,
        pdp_dynamic_range=dr,
        delay_resolution=1.0 / bw,
        azimuth_step=5.0,
        tx_antenna=BICONE_TX,
        rx_antenna=HORN_RX,
        tx_height=1.9,
        rx_height=1.9,
    )


B28 = _band(BandLabel.B28, 28.5e9, 2.0, 123.0)
B140 = _band(BandLabel.B140, 143.1e9, -7.0, 130.0)
BANDS = {BandLabel.B28: B28, BandLabel.B140: B140}


def band_config(label) -> BandConfig:
    """Measurement configuration of the 28 or 140 GHz band."""
    return BANDS[BandLabel(label)]


@dataclass(frozen=True)
class Mpc:
    """One multipath component.

    ``path_gain`` is the channel gain in dB with both measurement antennas
    removed.  The azimuth is wrapped to [0, 360) on construction.
    """

    delay: float
    aoa_azimuth: float
    path_gain: float

    def __post_init__(self):
        object.__setattr__(self, "delay", float(self.delay))
        object.__setattr__(self, "path_gain", float(self.path_gain))
        object.__setattr__(self, "aoa_azimuth", wrap_deg(float(self.aoa_azimuth)))
        if not self.delay >= 0.0:
            raise ValueError(f"MPC delay must be non-negative, got {self.delay}")
        if not self.path_gain <= 0.0:
            raise ValueError(f"MPC path gain must be <= 0 dB, got {self.path_gain}")


def mpc_arrays(mpcs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a list of MPCs into (delay, aoa, gain) arrays."""
    mpcs = list(mpcs)
    delay = np.array([m.delay for m in mpcs], dtype=float)
    aoa = np.array([m.aoa_azimuth for m in mpcs], dtype=float)
    gain = np.array([m.path_gain for m in mpcs], dtype=float)
    return delay, aoa, gain


@dataclass(frozen=True)
class LinkStats:
    link_id: str
    omni_pathloss: float
    delay_spread: float
    azimuth_spread: float
    n_paths_30db: int
    n_paths_15db: int

    def __post_init__(self):
        if self.delay_spread < 0 or self.azimuth_spread < 0:
            raise ValueError("spreads must be non-negative")
        if self.n_paths_15db > self.n_paths_30db:
            raise ValueError("n_paths_15db cannot exceed n_paths_30db")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Padp:
    """Power angular delay profile of one link sweep.

    ``power_grid`` has shape ``(n_azimuth, n_delay)``; row ``k`` is the
    delay profile seen with the Rx horn pointing at ``azimuth_axis[k]``.
    The delay axis starts at absolute propagation delay.
    """

    band: BandConfig
    link_id: str
    tx_rx_distance: float
    los_state: LosState
    delay_axis: np.ndarray
    azimuth_axis: np.ndarray
    power_grid: np.ndarray
    noise_floor: float

    def __post_init__(self):
        object.__setattr__(self, "los_state", LosState(self.los_state))
        object.__setattr__(self, "delay_axis", _frozen(self.delay_axis))
        object.__setattr__(self, "azimuth_axis", _frozen(self.azimuth_axis))
        object.__setattr__(self, "power_grid", _frozen(self.power_grid))
        object.__setattr__(self, "noise_floor", float(self.noise_floor))
        band = self.band
        grid = self.power_grid
        if grid.ndim != 2:
            raise ValueError(f"power_grid must be 2-D, got shape {grid.shape}")
        n_az = band.n_azimuth
        if self.azimuth_axis.shape != (n_az,):
            raise ValueError(
                f"azimuth axis has {self.azimuth_axis.size} bins, expected {n_az} "
                f"for a {band.azimuth_step} deg step"
            )
        if grid.shape[0] != n_az:
            raise ValueError(f"power grid has {grid.shape[0]} rows, expected {n_az} rows")
        if grid.shape[1] != self.delay_axis.size:
            raise ValueError(
                f"power grid has {grid.shape[1]} columns but the delay axis has "
                f"{self.delay_axis.size} bins"
            )
        if self.delay_axis.size < 2:
            raise ValueError("delay axis needs at least two bins")
        step = band.delay_resolution
        if not np.allclose(np.diff(self.delay_axis), step, rtol=1e-9, atol=step * 1e-9):
            raise ValueError("delay axis is not uniform with step = delay_resolution")
        if not np.allclose(np.diff(self.azimuth_axis), band.azimuth_step, rtol=0, atol=1e-9):
            raise ValueError("azimuth axis is not uniform with step = azimuth_step")
        if abs(self.azimuth_axis[0]) > 1e-9:
            raise ValueError("azimuth axis must start at 0 deg")
        finite = grid[np.isfinite(grid)]
        if finite.size and finite.min() < self.noise_floor - 20.0:
            raise ValueError(
                f"grid value {finite.min():.2f} dB is more than 20 dB below the "
                f"noise floor {self.noise_floor:.2f} dB"
            )

    @classmethod
    def from_grid(cls, band, power_grid, noise_floor, link_id="link",
                  tx_rx_distance=1.0, los_state=LosState.LOS, delay_origin=0.0):
        """Build a PADP with canonical axes for ``power_grid``."""
        grid = np.asarray(power_grid, dtype=float)
        n_delay = grid.shape[1] if grid.ndim == 2 else 0
        return cls(
            band=band,
            link_id=link_id,
            tx_rx_distance=tx_rx_distance,
            los_state=los_state,
            delay_axis=delay_axis(band, n_delay, delay_origin),
            azimuth_axis=azimuth_axis(band),
            power_grid=grid,
            noise_floor=noise_floor,
        )

    @property
    def n_azimuth(self) -> int:
        return self.power_grid.shape[0]

    @property
    def n_delay(self) -> int:
        return self.power_grid.shape[1]

    def first_arrival_view(self) -> np.ndarray:
        """Delay axis shifted so the first bin holding signal sits at 0."""
        above = np.nonzero((self.power_grid > self.noise_floor + 6.0).any(axis=0))[0]
        t0 = self.delay_axis[above[0]] if above.size else self.delay_axis[0]
        return self.delay_axis - t0


def delay_axis(band: BandConfig, n_delay: int, origin: float = 0.0) -> np.ndarray:
    return origin + band.delay_resolution * np.arange(n_delay, dtype=float)


def azimuth_axis(band: BandConfig) -> np.ndarray:
    return band.azimuth_step * np.arange(band.n_azimuth, dtype=float)


@dataclass(frozen=True)
class ComparabilityReport:
    """Pass/fail per comparability criterion between two band configs."""

    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks)}


def validate_comparability(a: BandConfig, b: BandConfig) -> ComparabilityReport:
    """Check that two band configurations allow a fair cross-band comparison.

    Equal bandwidth, delay resolution, Rx half-power beamwidths, azimuth step
    and (when both configs declare them) antenna heights are required.
    """
    checks = {
        "bandwidth": _close(a.bandwidth, b.bandwidth),
        "delay_resolution": _close(a.delay_resolution, b.delay_resolution),
        "rx_hpbw_azimuth": _close(a.rx_antenna.hpbw_azimuth, b.rx_antenna.hpbw_azimuth),
        "rx_hpbw_elevation": _close(a.rx_antenna.hpbw_elevation, b.rx_antenna.hpbw_elevation),
        "azimuth_step": _close(a.azimuth_step, b.azimuth_step),
    }
    if a.tx_height is not None and b.tx_height is not None:
        checks["tx_height"] = _close(a.tx_height, b.tx_height)
    if a.rx_height is not None and b.rx_height is not None:
        checks["rx_height"] = _close(a.rx_height, b.rx_height)
    return ComparabilityReport(checks)


__all__ = [
    "SPEED_OF_LIGHT",
    "BandLabel",
    "LosState",
    "AntennaPattern",
    "BandConfig",
    "HORN_RX",
    "BICONE_TX",
    "B28",
    "B140",
    "band_config",
    "Mpc",
    "mpc_arrays",
    "LinkStats",
    "Padp",
    "delay_axis",
    "azimuth_axis",
    "ComparabilityReport",
    "validate_comparability",
    "wrap_deg",
    "wrap_offset_deg",
]
