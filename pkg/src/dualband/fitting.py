"""Model fits: log-distance pathloss, cluster power vs distance, and the
composite power angular spectrum (Gaussian and Von Mises shapes)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .data import BandConfig, validate_comparability

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SIGMA_BRACKET = (0.5, 180.0)
KAPPA_BRACKET = (0.0, 500.0)


@dataclass(frozen=True)
class PathlossFit:
    """``PL(d) = 10 A log10(d / 1 m) + B + N(0, sigma^2)``."""

    A: float
    B: float
    sigma: float
    n_samples: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def to_dict(self) -> dict:
        return {"model": "pathloss", "params": {"A": self.A, "B": self.B},
                "sigma": self.sigma, "n_samples": self.n_samples}


@dataclass(frozen=True)
class ClusterPowerFit:
    """``Pc = A log10(dc) + B`` with Pc in dB and dc in metres."""

    A: float
    B: float
    n_samples: int = 0

    def __call__(self, dc):
        return self.A * np.log10(dc) + self.B

    def to_dict(self) -> dict:
        return {"model": "clusterpower", "params": {"A": self.A, "B": self.B},
                "n_samples": self.n_samples}


class PasModel(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    VON_MISES = "VonMises"


@dataclass(frozen=True)
class PasFit:
    """Fitted composite PAS.  ``param`` is sigma in degrees or kappa."""

    model: PasModel
    param: float
    rmse: float
    n_samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", PasModel(self.model))
        if self.model is PasModel.GAUSSIAN and not self.param > 0:
            raise ValueError("sigma must be positive")
        if self.model is PasModel.VON_MISES and not self.param >= 0:
            raise ValueError("kappa must be non-negative")
        if self.rmse < 0:
            raise ValueError("rmse must be non-negative")

    @property
    def sigma_deg(self) -> float:
        return self.param

    @property
    def kappa(self) -> float:
        return self.param

    def __call__(self, offset_deg):
        return pas_model(self.model, offset_deg, self.param)

    def to_dict(self) -> dict:
        name = "sigma_deg" if self.model is PasModel.GAUSSIAN else "kappa"
        return {"model": f"pas_{self.model.value}", "params": {name: self.param},
                "rmse": self.rmse, "n_samples": self.n_samples}


# -- pathloss and cluster power ---------------------------------------------

def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError(f"need at least 2 samples, got {x.size}")
    xm = x.mean()
    sxx = np.sum((x - xm) ** 2)
    if not sxx > 0:
        raise ValueError("all samples share one distance; slope is undefined")
    ym = y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    return slope, intercept


def _split(samples):
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    if np.any(arr[:, 0] <= 0):
        raise ValueError("distances must be positive")
    return arr[:, 0], arr[:, 1]


def fit_pathloss(samples) -> PathlossFit:
    """Least-squares fit of pathloss samples ``(distance_m, pathloss_db)``.

    ``sigma`` is the population standard deviation of the residuals.
    """
    d, pl = _split(samples)
    x = 10.0 * np.log10(d)
    a, b = _ols(x, pl)
    resid = pl - (a * x + b)
    return PathlossFit(a, b, float(resid.std()), int(d.size))


def evaluate_pathloss(fit: PathlossFit, d, shadowing=0.0):
    if np.any(np.asarray(d) <= 0):
        raise ValueError(f"distance must be positive, got {d}")
    out = 10.0 * fit.A * np.log10(d) + fit.B + shadowing
    return float(out) if np.ndim(out) == 0 else out


def fit_cluster_power(samples) -> ClusterPowerFit:
    """Least-squares fit of ``(cluster_distance_m, cluster_power_db)`` samples."""
    dc, pc = _split(samples)
    a, b = _ols(np.log10(dc), pc)
    return ClusterPowerFit(a, b, int(dc.size))


# -- Bessel I0 --------------------------------------------------------------

def _i0_series(x: float) -> float:
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term < total * 1e-17:
            return total


def _i0e_asymptotic(x: float) -> float:
    # e^-x I0(x) ~ (2 pi x)^-1/2 * sum_k ((2k-1)!!)^2 / (k! (8x)^k), summed
    # until the terms stop shrinking
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (k * 8.0 * x)
        if nxt >= term or nxt < total * 1e-17:
            break
        term = nxt
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i0(kappa: float) -> float:
    """Modified Bessel function of the first kind, order 0.

    Power series below 15, asymptotic expansion above.
    """
    if kappa < 0:
        raise ValueError(f"I0 argument must be non-negative, got {kappa}")
    if kappa < 15.0:
        return _i0_series(kappa)
    return math.exp(kappa) * _i0e_asymptotic(kappa)


def bessel_i0e(kappa: float) -> float:
    """Exponentially scaled ``exp(-kappa) * I0(kappa)``; safe for large kappa."""
    if kappa < 0:
        raise ValueError(f"I0 argument must be non-negative, got {kappa}")
    if kappa < 15.0:
        return math.exp(-kappa) * _i0_series(kappa)
    return _i0e_asymptotic(kappa)


# -- PAS --------------------------------------------------------------------

def gaussian_pas(offset_deg, sigma_deg: float):
    """Normalised PAS ``exp(-(phi/sigma)^2)``."""
    return np.exp(-(np.asarray(offset_deg, dtype=float) / sigma_deg) ** 2)


def von_mises_pas(offset_deg, kappa: float):
    """Normalised PAS ``exp(kappa cos phi) / (2 pi I0(kappa))``.

    Used exactly as written, so the value at ``phi = 0`` is not 1 in general
    (about 1.124 for kappa = 8.2).
    """
    phi = np.deg2rad(np.asarray(offset_deg, dtype=float))
    return np.exp(kappa * (np.cos(phi) - 1.0)) / (2.0 * math.pi * bessel_i0e(kappa))


def pas_model(model, offset_deg, param):
    model = PasModel(model)
    if model is PasModel.GAUSSIAN:
        return gaussian_pas(offset_deg, param)
    return von_mises_pas(offset_deg, param)


def golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Minimiser of a unimodal ``f`` on ``[lo, hi]`` by golden-section search."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    # the bracket ends are candidates too (monotone objective)
    return min((lo, x, hi), key=f)


def fit_pas(samples, model) -> PasFit:
    """Fit the single shape parameter of a PAS model by least squares.

    Parameters
    ----------
    samples : sequence of (offset_deg, normalized_power)
        Normalised cluster powers ``P_n / max(P_n)`` against offset AoA.
    model : PasModel or str
        ``"Gaussian"`` searches sigma over [0.5, 180] deg, ``"VonMises"``
        searches kappa over [0, 500].
    """
    model = PasModel(model)
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    if arr.shape[0] < 3:
        raise ValueError(f"need at least 3 PAS samples, got {arr.shape[0]}")
    phi, p = arr[:, 0], arr[:, 1]
    wrapped = (phi + 180.0) % 360.0 - 180.0
    if np.ptp(wrapped) == 0:
        raise ValueError("all PAS samples sit at one offset angle")

    def rmse(param):
        return float(np.sqrt(np.mean((pas_model(model, phi, param) - p) ** 2)))

    lo, hi = SIGMA_BRACKET if model is PasModel.GAUSSIAN else KAPPA_BRACKET
    best = golden_section(rmse, lo, hi)
    return PasFit(model, best, rmse(best), int(phi.size))


# -- band comparison --------------------------------------------------------

@dataclass(frozen=True)
class BandReport:
    """Aggregated analysis results of one band."""

    band: BandConfig
    pathloss: PathlossFit | None = None
    cluster_power: ClusterPowerFit | None = None
    pas_gaussian: PasFit | None = None
    pas_von_mises: PasFit | None = None
    mean_delay_spread: float | None = None
    mean_azimuth_spread: float | None = None
    n_stats: tuple | None = None
    m_stats: tuple | None = None

    def to_dict(self) -> dict:
        def rec(fit):
            return None if fit is None else fit.to_dict()

        return {
            "band": self.band.to_dict(),
            "pathloss": rec(self.pathloss),
            "cluster_power": rec(self.cluster_power),
            "pas_gaussian": rec(self.pas_gaussian),
            "pas_von_mises": rec(self.pas_von_mises),
            "mean_delay_spread_ns": None if self.mean_delay_spread is None else self.mean_delay_spread * 1e9,
            "mean_azimuth_spread_deg": self.mean_azimuth_spread,
            "N": None if self.n_stats is None else list(self.n_stats),
            "M": None if self.m_stats is None else list(self.m_stats),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BandReport":
        """Inverse of :meth:`to_dict`; missing entries become ``None``."""
        def get(key):
            return d.get(key)

        pl, cp = get("pathloss"), get("cluster_power")
        pas = {}
        for key in ("pas_gaussian", "pas_von_mises"):
            r = get(key)
            if r is not None:
                model = PasModel(r["model"].removeprefix("pas_"))
                pas[key] = PasFit(model, float(next(iter(r["params"].values()))),
                                  float(r["rmse"]), int(r.get("n_samples", 0)))
        ds = get("mean_delay_spread_ns")
        return cls(
            band=BandConfig.from_dict(d["band"]),
            pathloss=None if pl is None else PathlossFit(
                float(pl["params"]["A"]), float(pl["params"]["B"]), float(pl["sigma"]),
                int(pl.get("n_samples", 0))),
            cluster_power=None if cp is None else ClusterPowerFit(
                float(cp["params"]["A"]), float(cp["params"]["B"]), int(cp.get("n_samples", 0))),
            pas_gaussian=pas.get("pas_gaussian"),
            pas_von_mises=pas.get("pas_von_mises"),
            mean_delay_spread=None if ds is None else float(ds) * 1e-9,
            mean_azimuth_spread=get("mean_azimuth_spread_deg"),
            n_stats=None if get("N") is None else tuple(get("N")),
            m_stats=None if get("M") is None else tuple(get("M")),
        )

    def metrics(self) -> dict:
        """Flat mapping of the comparable quantities (DS in ns)."""
        out = {}
        if self.pathloss is not None:
            out.update(pathloss_A=self.pathloss.A, pathloss_B=self.pathloss.B,
                       pathloss_sigma=self.pathloss.sigma)
        if self.cluster_power is not None:
            out.update(cluster_power_A=self.cluster_power.A, cluster_power_B=self.cluster_power.B)
        if self.mean_delay_spread is not None:
            out["delay_spread_ns"] = self.mean_delay_spread * 1e9
        if self.mean_azimuth_spread is not None:
            out["azimuth_spread_deg"] = self.mean_azimuth_spread
        if self.n_stats is not None:
            out.update(N_mean=self.n_stats[0], N_std=self.n_stats[1])
        if self.m_stats is not None:
            out.update(M_mean=self.m_stats[0], M_std=self.m_stats[1])
        if self.pas_gaussian is not None:
            out["pas_sigma_deg"] = self.pas_gaussian.param
        if self.pas_von_mises is not None:
            out["pas_kappa"] = self.pas_von_mises.param
        return out


DEFAULT_DELTA_THRESHOLDS = {
    "pathloss_A": 0.3,
    "pathloss_B": 15.0,
    "pathloss_sigma": 1.0,
    "cluster_power_A": 10.0,
    "cluster_power_B": 25.0,
    "delay_spread_ns": 5.0,
    "azimuth_spread_deg": 5.0,
    "N_mean": 2.0,
    "N_std": 2.0,
    "M_mean": 2.0,
    "M_std": 3.0,
    "pas_sigma_deg": 5.0,
    "pas_kappa": 3.0,
}


@dataclass(frozen=True)
class BandComparison:
    deltas: dict
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"deltas": dict(self.deltas), "flags": dict(self.flags)}


def compare_bands(a: BandReport, b: BandReport, thresholds: dict | None = None) -> BandComparison:
    """Per-metric deltas ``a - b`` for metrics present in both reports.

    A metric is flagged when ``|delta|`` exceeds its threshold.

    Raises
    ------
    ValueError
        If the two band configurations are not comparable.
    """
    comp = validate_comparability(a.band, b.band)
    if not comp.passed:
        raise ValueError(f"bands are not comparable: failed {', '.join(comp.failures)}")
    limits = dict(DEFAULT_DELTA_THRESHOLDS)
    if thresholds:
        limits.update(thresholds)
    ma, mb = a.metrics(), b.metrics()
    deltas = {k: ma[k] - mb[k] for k in ma if k in mb}
    flags = {k: abs(v) > limits[k] for k, v in deltas.items() if k in limits}
    return BandComparison(deltas, flags)
