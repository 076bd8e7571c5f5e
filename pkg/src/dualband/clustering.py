"""Hierarchical MPC clustering under the multipath component distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SPEED_OF_LIGHT, Mpc, mpc_arrays
from .metrics import circular_mean_deg

DEFAULT_ZETA = 8.0
DEFAULT_CUTOFF = 0.25


@dataclass(frozen=True)
class Cluster:
    members: tuple
    power: float
    centroid_delay: float
    centroid_azimuth: float

    @property
    def distance(self) -> float:
        return SPEED_OF_LIGHT * self.centroid_delay

    @property
    def size(self) -> int:
        return len(self.members)

    @classmethod
    def from_members(cls, members) -> "Cluster":
        members = tuple(sorted(members, key=_mpc_key))
        delay, aoa, gain = mpc_arrays(members)
        top = gain.max()
        p = 10.0 ** ((gain - top) / 10.0)
        return cls(
            members=members,
            power=float(top + 10.0 * np.log10(p.sum())),
            centroid_delay=float(p @ delay / p.sum()),
            centroid_azimuth=circular_mean_deg(aoa, p),
        )


@dataclass(frozen=True)
class ClusterSet:
    """Clusters of one link.

    ``mcd_zeta`` and ``mcd_cutoff`` record the clustering settings; they are
    ``None`` for ground-truth clusters built by the generator.
    """

    clusters: tuple
    source_link_id: str
    mcd_zeta: float | None
    mcd_cutoff: float | None

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def labels_for(self, mpcs) -> list[int]:
        """Cluster index of every MPC in ``mpcs``."""
        lookup = {}
        for i, c in enumerate(self.clusters):
            for m in c.members:
                lookup.setdefault(m, i)
        return [lookup[m] for m in mpcs]


def _mpc_key(m: Mpc):
    return (m.delay, m.aoa_azimuth, m.path_gain)


def mcd(a: Mpc, b: Mpc, zeta: float, delay_span: float, delay_std: float) -> float:
    """Multipath component distance between two MPCs.

    ``sqrt(d_angle^2 + d_delay^2)`` with ``d_angle = |e(phi_a) - e(phi_b)| / 2``
    for unit vectors on the azimuth circle and
    ``d_delay = zeta * |tau_a - tau_b| / delay_span * delay_std / delay_span``.
    """
    if not delay_span > 0:
        raise ValueError(f"delay_span must be positive, got {delay_span}")
    da = np.deg2rad(a.aoa_azimuth)
    db = np.deg2rad(b.aoa_azimuth)
    d_angle = abs(np.exp(1j * da) - np.exp(1j * db)) / 2.0
    d_delay = zeta * (abs(a.delay - b.delay) / delay_span) * (delay_std / delay_span)
    return float(np.hypot(d_angle, d_delay))


def mcd_matrix(mpcs, zeta: float = DEFAULT_ZETA) -> np.ndarray:
    """Pairwise MCD with the link's delay span and delay standard deviation."""
    delay, aoa, _ = mpc_arrays(mpcs)
    e = np.exp(1j * np.deg2rad(aoa))
    d_angle = np.abs(e[:, None] - e[None, :]) / 2.0
    span = delay.max() - delay.min() if delay.size else 0.0
    if span > 0:
        d_delay = zeta * (delay.std() / span) * (np.abs(delay[:, None] - delay[None, :]) / span)
    else:
        d_delay = np.zeros_like(d_angle)
    return np.hypot(d_angle, d_delay)


def complete_linkage(dist: np.ndarray, cutoff: float) -> np.ndarray:
    """Agglomerative complete-linkage labels for a distance matrix.

    Repeatedly merges the pair of clusters with the smallest complete-linkage
    distance, preferring the pair with the smallest indices on ties, until
    that distance exceeds ``cutoff``.  Labels are numbered in order of first
    appearance.
    """
    n = dist.shape[0]
    d = np.array(dist, dtype=float)
    np.fill_diagonal(d, np.inf)
    active = np.ones(n, dtype=bool)
    owner = np.arange(n)
    while active.sum() > 1:
        sub = np.where(active[:, None] & active[None, :], d, np.inf)
        flat = int(np.argmin(sub))  # row-major: smallest (i, j) on ties
        i, j = divmod(flat, n)
        if sub[i, j] > cutoff:
            break
        i, j = min(i, j), max(i, j)
        d[i, :] = np.maximum(d[i, :], d[j, :])
        d[:, i] = d[i, :]
        d[i, i] = np.inf
        active[j] = False
        owner[owner == j] = i
    _, labels = np.unique(owner, return_inverse=True)
    # renumber by first appearance
    remap = {}
    return np.array([remap.setdefault(lab, len(remap)) for lab in labels])


def hierarchical_cluster(mpcs, zeta: float = DEFAULT_ZETA, cutoff: float = DEFAULT_CUTOFF,
                         link_id: str = "link") -> ClusterSet:
    """Cluster MPCs by complete linkage under the MCD.

    Input order does not matter: MPCs are sorted by (delay, azimuth, gain)
    before clustering.  Clusters are returned in order of increasing
    centroid delay.
    """
    mpcs = sorted(mpcs, key=_mpc_key)
    if not mpcs:
        raise ValueError("no MPCs to cluster")
    labels = complete_linkage(mcd_matrix(mpcs, zeta), cutoff)
    groups: dict[int, list] = {}
    for m, lab in zip(mpcs, labels):
        groups.setdefault(int(lab), []).append(m)
    clusters = [Cluster.from_members(g) for g in groups.values()]
    clusters.sort(key=lambda c: (c.centroid_delay, c.centroid_azimuth, c.power))
    return ClusterSet(tuple(clusters), link_id, float(zeta), float(cutoff))


def _mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std())


def cluster_stats(sets) -> dict:
    """Mean and population std of N (clusters per link) and M (MPCs per cluster)."""
    sets = list(sets)
    if not sets:
        raise ValueError("no cluster sets")
    n = [s.n_clusters for s in sets]
    m = [c.size for s in sets for c in s.clusters]
    return {"N": _mean_std(n), "M": _mean_std(m)}
