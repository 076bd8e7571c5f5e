"""Stochastic dual-band link generator and round-trip validation."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import (
    DEFAULT_CUTOFF,
    DEFAULT_ZETA,
    Cluster,
    ClusterSet,
    cluster_stats,
    hierarchical_cluster,
)
from .data import SPEED_OF_LIGHT, BandLabel, Mpc, mpc_arrays
from .fitting import (
    ClusterPowerFit,
    PasFit,
    PasModel,
    PathlossFit,
    evaluate_pathloss,
    fit_cluster_power,
    fit_pas,
    fit_pathloss,
)
from .metrics import circular_mean_deg, link_stats, threshold_mpcs

DISTANCE_RANGE = (3.0, 65.0)


@dataclass(frozen=True)
class BandModel:
    """Generative parameters of one band.

    ``pathloss``, ``cluster_power``, ``pas``, ``n_clusters`` and
    ``m_per_cluster`` come from the measured tables.  The remaining four
    fields (intra-cluster spreads, mean cluster excess delay, per-cluster
    shadowing) are calibrated so that the generated ensemble reproduces the
    measured delay spread and cluster statistics; they are not measured.
    """

    pathloss: PathlossFit
    cluster_power: ClusterPowerFit
    pas: PasFit
    n_clusters: tuple = (1.0, 0.0)
    m_per_cluster: tuple = (1.0, 0.0)
    intra_cluster_delay_std: float = 3e-9
    intra_cluster_angle_std: float = 3.0
    excess_delay_mean: float = 25e-9
    per_cluster_shadowing_std: float = 6.0
    band_label: BandLabel | None = None
    distance_range: tuple = DISTANCE_RANGE

    def __post_init__(self):
        for name in ("intra_cluster_delay_std", "intra_cluster_angle_std",
                     "excess_delay_mean", "per_cluster_shadowing_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("n_clusters", "m_per_cluster"):
            mu, sigma = getattr(self, name)
            if sigma < 0:
                raise ValueError(f"{name} sigma must be non-negative")
            if max(1, round(mu)) < 1:
                raise ValueError(f"{name} mean must round to at least 1")
        if self.band_label is not None:
            object.__setattr__(self, "band_label", BandLabel(self.band_label))

    def to_dict(self) -> dict:
        return {
            "band_label": None if self.band_label is None else self.band_label.value,
            "pathloss": {"A": self.pathloss.A, "B": self.pathloss.B, "sigma": self.pathloss.sigma},
            "cluster_power": {"A": self.cluster_power.A, "B": self.cluster_power.B},
            "pas": {"model": self.pas.model.value, "param": self.pas.param, "rmse": self.pas.rmse},
            "n_clusters": list(self.n_clusters),
            "m_per_cluster": list(self.m_per_cluster),
            "intra_cluster_delay_std": self.intra_cluster_delay_std,
            "intra_cluster_angle_std": self.intra_cluster_angle_std,
            "excess_delay_mean": self.excess_delay_mean,
            "per_cluster_shadowing_std": self.per_cluster_shadowing_std,
            "distance_range": list(self.distance_range),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BandModel":
        base = band_model(d["band_label"]) if d.get("band_label") else None
        kw = {}
        if "pathloss" in d:
            p = d["pathloss"]
            kw["pathloss"] = PathlossFit(float(p["A"]), float(p["B"]), float(p["sigma"]))
        if "cluster_power" in d:
            p = d["cluster_power"]
            kw["cluster_power"] = ClusterPowerFit(float(p["A"]), float(p["B"]))
        if "pas" in d:
            p = d["pas"]
            kw["pas"] = PasFit(PasModel(p["model"]), float(p["param"]), float(p.get("rmse", 0.0)))
        for key in ("n_clusters", "m_per_cluster", "distance_range"):
            if key in d:
                kw[key] = tuple(float(v) for v in d[key])
        for key in ("intra_cluster_delay_std", "intra_cluster_angle_std",
                    "excess_delay_mean", "per_cluster_shadowing_std"):
            if key in d:
                kw[key] = float(d[key])
        if d.get("band_label"):
            kw["band_label"] = BandLabel(d["band_label"])
        if base is not None:
            return replace(base, **kw)
        return cls(**kw)


# measured parameters per band: pathloss (A, B, sigma), cluster power (A, B),
# Gaussian PAS (sigma, rmse), N (mu, sigma), M (mu, sigma)
_TABLES = {
    BandLabel.B28: dict(pl=(2.10, 59.16, 2.85), cp=(-30.5, -58.0), pas=(17.9, 0.011),
                        n=(7.9, 3.6), m=(5.4, 6.0)),
    BandLabel.B140: dict(pl=(2.22, 70.77, 2.94), cp=(-24.8, -78.1), pas=(18.0, 0.005),
                         n=(5.9, 2.1), m=(3.8, 2.5)),
}

# calibrated generator fields (not measured): mean cluster excess delay (s),
# intra-cluster delay std (s), intra-cluster angle std (deg), per-cluster
# shadowing std (dB); tuned with the round trip at ROUNDTRIP_ZETA/CUTOFF
CALIBRATION = {
    BandLabel.B28: dict(excess_delay_mean=60e-9, intra_cluster_delay_std=1e-9,
                        intra_cluster_angle_std=40.0, per_cluster_shadowing_std=6.0),
    BandLabel.B140: dict(excess_delay_mean=45e-9, intra_cluster_delay_std=1e-9,
                         intra_cluster_angle_std=36.0, per_cluster_shadowing_std=8.0),
}

# MCD settings under which the calibration holds
ROUNDTRIP_ZETA = 16.0
ROUNDTRIP_CUTOFF = 0.7

# Von Mises fit of the same PAS data: (kappa, rmse)
VON_MISES_PAS = {BandLabel.B28: (8.2, 0.086), BandLabel.B140: (8.2, 0.085)}

# measured ensemble means: delay spread (s), azimuth spread (deg)
SPREAD_TARGETS = {
    BandLabel.B28: {"delay_spread": 19e-9, "azimuth_spread": 33.0},
    BandLabel.B140: {"delay_spread": 19e-9, "azimuth_spread": 29.0},
}


def band_model(label, pas_model: str = "Gaussian") -> BandModel:
    """Generator preset for the 28 or 140 GHz band."""
    label = BandLabel(label)
    t = _TABLES[label]
    if PasModel(pas_model) is PasModel.GAUSSIAN:
        pas = PasFit(PasModel.GAUSSIAN, *t["pas"])
    else:
        pas = PasFit(PasModel.VON_MISES, *VON_MISES_PAS[label])
    return BandModel(
        pathloss=PathlossFit(*t["pl"]),
        cluster_power=ClusterPowerFit(*t["cp"]),
        pas=pas,
        n_clusters=t["n"],
        m_per_cluster=t["m"],
        band_label=label,
        **CALIBRATION[label],
    )


@dataclass(frozen=True)
class LinkRealization:
    band_label: BandLabel | None
    distance: float
    clusters: ClusterSet
    mpcs: tuple
    shadowing_draw: float
    seed: int
    pathloss: float
    link_id: str = "link"


def derive_seed(base: int, *parts) -> int:
    """Deterministic 63-bit seed from a base seed and naming parts.

    ``sha256("base:part1:part2...")`` truncated to its first 8 bytes.
    """
    text = ":".join(str(p) for p in (base, *parts))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def sample_von_mises(rng, kappa: float, size: int) -> np.ndarray:
    """Von Mises draws (radians, mean 0) by Best-Fisher rejection.

    The envelope is a wrapped Cauchy distribution.  For each draw:
    ``z = cos(pi u1)``, ``f = (1 + r z) / (r + z)``, ``c = kappa (r - f)``;
    accept when ``c (2 - c) > u2`` or ``ln(c / u2) + 1 >= c``, then the angle
    is ``sign(u3 - 1/2) arccos(f)``.
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    if kappa < 1e-8:
        return rng.uniform(-math.pi, math.pi, size)
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(size)
    for i in range(size):
        while True:
            u1, u2, u3 = rng.random(3)
            z = math.cos(math.pi * u1)
            f = (1.0 + r * z) / (r + z)
            c = kappa * (r - f)
            if c * (2.0 - c) - u2 > 0 or (u2 > 0 and math.log(c / u2) + 1.0 - c >= 0):
                break
        out[i] = math.copysign(math.acos(max(-1.0, min(1.0, f))), u3 - 0.5)
    return out


def _clipped_count(rng, mu_sigma, size=None):
    mu, sigma = mu_sigma
    draw = rng.normal(mu, sigma, size)
    return np.maximum(1, np.round(draw)).astype(int)


def generate_link(model: BandModel, distance: float, seed: int, link_id: str = "link") -> LinkRealization:
    """One synthetic link.

    1. Cluster count ``N`` and per-cluster ray counts ``M_k`` are rounded
       normal draws clipped at 1.
    2. Cluster excess delays are exponential; the cluster distance is the
       link distance plus the excess path length.
    3. Cluster powers follow the cluster power-distance line plus normal
       per-cluster shadowing.
    4. Cluster AoA offsets invert the Gaussian PAS
       (``sigma * sqrt(-ln(P / P_max))`` with a random sign) or are Von Mises
       draws; a uniform global rotation is added.
    5. Rays scatter normally around their cluster in delay and angle with
       equal powers summing to the cluster power.
    6. All ray powers are rescaled by one factor so the total equals the
       pathloss model at ``distance`` with a normal shadowing draw.
    """
    lo, hi = model.distance_range
    if not (distance > 0 and lo <= distance <= hi):
        raise ValueError(f"distance {distance} m is outside the model range [{lo}, {hi}] m")
    rng = np.random.default_rng(seed)
    n = int(_clipped_count(rng, model.n_clusters))
    m = _clipped_count(rng, model.m_per_cluster, n)
    excess = rng.exponential(model.excess_delay_mean, n) if model.excess_delay_mean > 0 else np.zeros(n)
    d_k = distance + SPEED_OF_LIGHT * excess
    p_k = model.cluster_power(d_k) + rng.normal(0.0, model.per_cluster_shadowing_std, n)

    if model.pas.model is PasModel.GAUSSIAN:
        rel = p_k - p_k.max()  # dB, <= 0
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        offsets = model.pas.param * np.sqrt(-rel * math.log(10.0) / 10.0) * sign
    else:
        offsets = np.rad2deg(sample_von_mises(rng, model.pas.param, n))
    rotation = rng.uniform(0.0, 360.0)
    cluster_aoa = offsets + rotation

    tau0 = distance / SPEED_OF_LIGHT
    delays, aoas, powers, owner = [], [], [], []
    for k in range(n):
        dt = rng.normal(0.0, model.intra_cluster_delay_std, m[k])
        da = rng.normal(0.0, model.intra_cluster_angle_std, m[k])
        delays.append(np.maximum(tau0 + excess[k] + dt, 0.0))
        aoas.append(cluster_aoa[k] + da)
        powers.append(np.full(m[k], p_k[k] - 10.0 * math.log10(m[k])))
        owner.append(np.full(m[k], k))
    delays = np.concatenate(delays)
    aoas = np.concatenate(aoas)
    powers = np.concatenate(powers)
    owner = np.concatenate(owner)

    shadow = float(rng.normal(0.0, model.pathloss.sigma)) if model.pathloss.sigma > 0 else 0.0
    pl = evaluate_pathloss(model.pathloss, distance, shadow)
    top = powers.max()
    total_db = top + 10.0 * math.log10(np.sum(10.0 ** ((powers - top) / 10.0)))
    gains = powers + (-pl - total_db)

    mpcs = tuple(Mpc(t, a, g) for t, a, g in zip(delays, aoas, gains))
    clusters = tuple(
        Cluster.from_members([mp for mp, o in zip(mpcs, owner) if o == k]) for k in range(n)
    )
    cset = ClusterSet(tuple(sorted(clusters, key=lambda c: (c.centroid_delay, c.centroid_azimuth))),
                      link_id, None, None)
    return LinkRealization(model.band_label, float(distance), cset, mpcs, shadow, int(seed), pl, link_id)


def generate_ensemble(model: BandModel, distances, seeds, threads: int = 1) -> list[LinkRealization]:
    """One independent realization per ``(distance, seed)`` pair.

    ``seeds`` is a sequence matching ``distances`` or an integer base seed,
    in which case link ``i`` uses ``derive_seed(base, "link", i)``.  The
    result does not depend on ``threads``.
    """
    distances = [float(d) for d in distances]
    if not distances:
        raise ValueError("no distances")
    if isinstance(seeds, (int, np.integer)):
        seeds = [derive_seed(int(seeds), "link", i) for i in range(len(distances))]
    seeds = [int(s) for s in seeds]
    if len(seeds) != len(distances):
        raise ValueError("need one seed per distance")
    ids = [f"link{i:04d}" for i in range(len(distances))]
    args = list(zip(distances, seeds, ids))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda a: generate_link(model, *a), args))
    return [generate_link(model, *a) for a in args]


def log_uniform_distances(rng, n: int, lo: float = 3.0, hi: float = 65.0) -> np.ndarray:
    return 10.0 ** rng.uniform(math.log10(lo), math.log10(hi), n)


# -- round trip -------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "pathloss_A": 0.1,
    "pathloss_B": 1.0,
    "pathloss_sigma": 0.3,
    "delay_spread_ns": 4.0,
    "azimuth_spread_deg": 6.0,
    "N_mean": 0.5,
    "M_mean": 0.5,
    "cluster_power_A": 3.0,
}


@dataclass(frozen=True)
class LinkAnalysis:
    """Per-link analysis products used by the round trip and the pipeline."""

    link_id: str
    distance: float
    stats: object
    clusters: ClusterSet
    pas_samples: tuple


def pas_samples(cset: ClusterSet, mpcs) -> list[tuple[float, float]]:
    """``(offset_deg, P_n / max P_n)`` per cluster.

    Offsets are measured from the power-weighted circular mean AoA of all
    MPCs of the link and wrapped to (-180, 180].
    """
    _, aoa, gain = mpc_arrays(mpcs)
    ref = circular_mean_deg(aoa, 10.0 ** ((gain - gain.max()) / 10.0))
    powers = np.array([c.power for c in cset.clusters])
    rel = 10.0 ** ((powers - powers.max()) / 10.0)
    out = []
    for c, r in zip(cset.clusters, rel):
        off = 180.0 - (180.0 - (c.centroid_azimuth - ref)) % 360.0
        out.append((float(off), float(r)))
    return out


def analyze_link(mpcs, link_id: str, distance: float, zeta: float = DEFAULT_ZETA,
                 cutoff: float = DEFAULT_CUTOFF, threshold_db: float = 30.0) -> LinkAnalysis:
    mpcs = list(mpcs)
    stats = link_stats(mpcs, link_id=link_id, threshold_db=threshold_db)
    kept = threshold_mpcs(mpcs, threshold_db)
    cset = hierarchical_cluster(kept, zeta, cutoff, link_id=link_id)
    return LinkAnalysis(link_id, float(distance), stats, cset, tuple(pas_samples(cset, kept)))


def summarize(analyses) -> dict:
    """Band-level fits and means over a list of :class:`LinkAnalysis`."""
    analyses = list(analyses)
    out = {}
    pl = [(a.distance, a.stats.omni_pathloss) for a in analyses]
    try:
        out["pathloss"] = fit_pathloss(pl)
    except ValueError:
        out["pathloss"] = None
    out["mean_delay_spread"] = float(np.mean([a.stats.delay_spread for a in analyses]))
    out["mean_azimuth_spread"] = float(np.mean([a.stats.azimuth_spread for a in analyses]))
    cs = cluster_stats([a.clusters for a in analyses])
    out["n_stats"], out["m_stats"] = cs["N"], cs["M"]
    cp = [(c.distance, c.power) for a in analyses for c in a.clusters.clusters]
    try:
        out["cluster_power"] = fit_cluster_power(cp)
    except ValueError:
        out["cluster_power"] = None
    samples = [s for a in analyses for s in a.pas_samples]
    for key, model in (("pas_gaussian", PasModel.GAUSSIAN), ("pas_von_mises", PasModel.VON_MISES)):
        try:
            out[key] = fit_pas(samples, model)
        except ValueError:
            out[key] = None
    return out


@dataclass
class ValidationReport:
    band_label: str | None
    n_links: int
    seed: int
    metrics: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m["pass"] for m in self.metrics.values())

    def to_dict(self) -> dict:
        return {
            "band_label": self.band_label,
            "n_links": self.n_links,
            "seed": self.seed,
            "passed": self.passed,
            "metrics": self.metrics,
            "extras": self.extras,
        }


def _check(recovered, target, tol):
    ok = recovered is not None and abs(recovered - target) <= tol
    return {"recovered": recovered, "target": target, "tolerance": tol, "pass": bool(ok)}


def validate_roundtrip(model: BandModel, n_links: int = 500, seed: int = 0,
                       tolerances: dict | None = None, zeta: float = ROUNDTRIP_ZETA,
                       cutoff: float = ROUNDTRIP_CUTOFF, targets: dict | None = None,
                       threads: int = 1, return_links: bool = False):
    """Generate an ensemble, analyse it, and compare with the model inputs.

    Distances are log-uniform over 3-65 m.  Every link goes through the
    30-dB thresholded link statistics and MCD clustering; the ensemble is
    then refitted.  Pathloss, N and M are compared with the model inputs,
    the cluster power slope with the model's, and mean delay and azimuth
    spreads with ``targets`` (the measured means for preset bands).
    """
    if n_links < 100:
        raise ValueError(f"round trip needs at least 100 links, got {n_links}")
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    rng = np.random.default_rng(derive_seed(seed, "validate", "distances"))
    lo = max(DISTANCE_RANGE[0], model.distance_range[0])
    hi = min(DISTANCE_RANGE[1], model.distance_range[1])
    distances = log_uniform_distances(rng, n_links, lo, hi)
    seeds = [derive_seed(seed, "validate", "link", i) for i in range(n_links)]
    links = generate_ensemble(model, distances, seeds, threads=threads)
    analyses = [analyze_link(r.mpcs, r.link_id, r.distance, zeta, cutoff) for r in links]
    s = summarize(analyses)

    if targets is None:
        targets = SPREAD_TARGETS.get(model.band_label, {})
    metrics = {}
    pl = s["pathloss"]
    metrics["pathloss_A"] = _check(pl.A if pl else None, model.pathloss.A, tol["pathloss_A"])
    metrics["pathloss_B"] = _check(pl.B if pl else None, model.pathloss.B, tol["pathloss_B"])
    metrics["pathloss_sigma"] = _check(pl.sigma if pl else None, model.pathloss.sigma, tol["pathloss_sigma"])
    if "delay_spread" in targets:
        metrics["delay_spread_ns"] = _check(s["mean_delay_spread"] * 1e9, targets["delay_spread"] * 1e9,
                                            tol["delay_spread_ns"])
    if "azimuth_spread" in targets:
        metrics["azimuth_spread_deg"] = _check(s["mean_azimuth_spread"], targets["azimuth_spread"],
                                               tol["azimuth_spread_deg"])
    metrics["N_mean"] = _check(s["n_stats"][0], model.n_clusters[0], tol["N_mean"])
    metrics["M_mean"] = _check(s["m_stats"][0], model.m_per_cluster[0], tol["M_mean"])
    cp = s["cluster_power"]
    metrics["cluster_power_A"] = _check(cp.A if cp else None, model.cluster_power.A, tol["cluster_power_A"])
    pas_key = "pas_gaussian" if model.pas.model is PasModel.GAUSSIAN else "pas_von_mises"
    pas = s[pas_key]
    if "pas_param" in tol:
        metrics["pas_param"] = _check(pas.param if pas else None, model.pas.param, tol["pas_param"])

    n30 = [a.stats.n_paths_30db for a in analyses]
    n15 = [a.stats.n_paths_15db for a in analyses]
    extras = {
        "recovered_N_std": s["n_stats"][1],
        "recovered_M_std": s["m_stats"][1],
        "cluster_power_B": cp.B if cp else None,
        "pas_model": model.pas.model.value,
        "pas_param": pas.param if pas else None,
        "pas_rmse": pas.rmse if pas else None,
        "mean_n_paths_30db": float(np.mean(n30)),
        "mean_n_paths_15db": float(np.mean(n15)),
        "links_with_n30_gt_n15": int(sum(a > b for a, b in zip(n30, n15))),
    }
    report = ValidationReport(None if model.band_label is None else model.band_label.value,
                              n_links, seed, metrics, extras)
    if return_links:
        return report, links, analyses
    return report
