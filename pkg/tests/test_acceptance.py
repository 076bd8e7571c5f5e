"""Acceptance criteria 1-8.

Each criterion records one ``PASS``/``FAIL`` line (printed in the pytest
terminal summary and by running this file directly).  The one part that the
generator as specified cannot meet is marked ``xfail(strict=True)``: it
reports as an expected failure and would flag an error if it started passing.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dualband.cli import main as cli_main
from dualband.data import B28, B140, Mpc
from dualband.extract import extract_mpcs
from dualband.fitting import bessel_i0, fit_pas, fit_pathloss, gaussian_pas, von_mises_pas
from dualband.generator import band_model, derive_seed, generate_ensemble, log_uniform_distances, validate_roundtrip
from dualband.metrics import azimuth_spread, friis_fspl, omni_pathloss, rms_delay_spread
from dualband.pipeline import demo_config
from dualband.sounder import random_scene, synthesize_padp

SEED = 2024
BANDS = ("B28", "B140")


def record(n, ok, detail):
    ACCEPTANCE_LINES[n] = f"Criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[n])
    return ok


# -- 1. pathloss round trip -------------------------------------------------

def test_criterion_1_pathloss_roundtrip():
    t0 = time.perf_counter()
    fits = {}
    for b in BANDS:
        model = band_model(b)
        rng = np.random.default_rng(derive_seed(SEED, "c1", b))
        d = log_uniform_distances(rng, 1000)
        links = generate_ensemble(model, d, derive_seed(SEED, "c1", b, "links"))
        # every ray kept: the omni pathloss of a link is its pathloss-model draw
        samples = [(r.distance, omni_pathloss(r.mpcs, threshold_db=math.inf)) for r in links]
        fits[b] = (fit_pathloss(samples), model.pathloss)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0
    parts = []
    for b, (fit, ref) in fits.items():
        good = abs(fit.A - ref.A) <= 0.05 and abs(fit.B - ref.B) <= 0.5 and abs(fit.sigma - ref.sigma) <= 0.15
        ok &= good
        parts.append(f"{b} A={fit.A:.3f} B={fit.B:.2f} sigma={fit.sigma:.2f}")
    record(1, ok, "; ".join(parts) + f"; {elapsed:.2f} s")
    assert ok


# -- 2. extraction oracle -----------------------------------------------------

def _match(truth, found, tol_t=0.25e-9, tol_a=2.5, tol_g=0.5):
    """Greedy one-to-one matching; a pair counts only if all errors are in tolerance."""
    used = set()
    errs = []
    hits = 0
    for m in sorted(truth, key=lambda m: -m.path_gain):
        best, best_d = None, None
        for j, e in enumerate(found):
            if j in used:
                continue
            da = abs((e.aoa_azimuth - m.aoa_azimuth + 180) % 360 - 180)
            dt = abs(e.delay - m.delay)
            dist = dt / tol_t + da / tol_a
            if best_d is None or dist < best_d:
                best, best_d = j, dist
        if best is None:
            continue
        e = found[best]
        dt = abs(e.delay - m.delay)
        da = abs((e.aoa_azimuth - m.aoa_azimuth + 180) % 360 - 180)
        dg = abs(e.path_gain - m.path_gain)
        if dt <= tol_t and da <= tol_a and dg <= tol_g:
            used.add(best)
            hits += 1
            errs.append((dt, da, dg))
    return hits, len(used), errs


def test_criterion_2_extraction_oracle():
    t0 = time.perf_counter()
    n_true = n_found = hits = matched = 0
    worst = np.zeros(3)
    for i in range(60):
        band = B28 if i % 2 == 0 else B140
        rng = np.random.default_rng(derive_seed(SEED, "c2", i))
        scene = random_scene(band, rng, n_mpc=20)
        found = extract_mpcs(synthesize_padp(scene), 30.0, 6.0)
        h, u, errs = _match(scene.mpcs, found)
        n_true += len(scene.mpcs)
        n_found += len(found)
        hits += h
        matched += u
        if errs:
            worst = np.maximum(worst, np.max(errs, axis=0))
    elapsed = time.perf_counter() - t0
    recall = hits / n_true
    precision = matched / n_found
    ok = recall >= 0.95 and precision >= 0.95 and elapsed < 30.0
    record(2, ok, f"60 scenes, recall={recall:.3f} precision={precision:.3f}, worst matched "
                  f"|dtau|={worst[0] * 1e9:.3f} ns |dphi|={worst[1]:.2f} deg |dgain|={worst[2]:.2f} dB; "
                  f"{elapsed:.1f} s")
    assert ok


# -- 3. analytic metrics ------------------------------------------------------

def test_criterion_3_analytic_metrics():
    def lin(delays_ns, powers):
        return [Mpc(t * 1e-9, 0.0, 10 * math.log10(p)) for t, p in zip(delays_ns, powers)]

    ds1 = rms_delay_spread(lin([0, 10], [1, 1]))
    ds2 = rms_delay_spread(lin([0, 10], [1, 0.25]))
    as1 = azimuth_spread([Mpc(0, 30.0, -80), Mpc(0, -30.0, -80)])
    rng = np.random.default_rng(SEED)
    rot_err = 0.0
    for _ in range(200):
        k = rng.integers(1, 15)
        rows = list(zip(rng.uniform(0, 300e-9, k), rng.uniform(0, 360, k), rng.uniform(-40, 0, k)))
        rot = rng.uniform(-360, 360)
        a = azimuth_spread([Mpc(t, p, g) for t, p, g in rows])
        b = azimuth_spread([Mpc(t, p + rot, g) for t, p, g in rows])
        rot_err = max(rot_err, abs(a - b))
    pl = omni_pathloss([Mpc(0, 0, -73.0103), Mpc(1e-9, 0, -73.0103)])
    ok = (abs(ds1 - 5e-9) < 1e-18 and abs(ds2 - 4e-9) < 1e-18 and abs(as1 - 30.73) <= 0.01
          and rot_err <= 1e-9 and abs(pl - 70.0) <= 1e-4)
    record(3, ok, f"DS={ds1 * 1e9:.6f}/{ds2 * 1e9:.6f} ns, AS={as1:.4f} deg, max rotation change "
                  f"{rot_err:.1e} deg, doubled-path PL={pl:.5f} dB")
    assert ok


# -- 4. PAS fit self-consistency ----------------------------------------------

def test_criterion_4_pas_fits():
    phi = np.linspace(-90, 90, 61)
    g = fit_pas(list(zip(phi, gaussian_pas(phi, 17.9))), "Gaussian")
    v = fit_pas(list(zip(phi, von_mises_pas(phi, 8.2))), "VonMises")
    i01 = bessel_i0(1.0)
    ok = abs(g.param - 17.9) <= 0.05 and g.rmse <= 1e-6 and abs(v.param - 8.2) <= 0.05 \
        and abs(i01 - 1.2660658778) <= 1e-9
    record(4, ok, f"sigma={g.param:.6f} deg rmse={g.rmse:.1e}; kappa={v.param:.6f}; I0(1)={i01:.10f}")
    assert ok


# -- 5 and 6. round trips on shared ensembles -----------------------------------

@pytest.fixture(scope="module")
def ensembles():
    out = {}
    for b in BANDS:
        t0 = time.perf_counter()
        rep, links, analyses = validate_roundtrip(band_model(b), 500, seed=derive_seed(SEED, "rt", b),
                                                  return_links=True)
        out[b] = (rep, analyses, time.perf_counter() - t0)
    return out


SLOPES = {"B28": -30.5, "B140": -24.8}


def _criterion_5(ensembles):
    ok = True
    parts = []
    for b in BANDS:
        rep, _, elapsed = ensembles[b]
        m = rep.metrics
        good = m["N_mean"]["pass"] and m["M_mean"]["pass"] and m["cluster_power_A"]["pass"] and elapsed < 120
        ok &= good
        parts.append(f"{b} N={m['N_mean']['recovered']:.2f}/{m['N_mean']['target']} "
                     f"M={m['M_mean']['recovered']:.2f}/{m['M_mean']['target']} "
                     f"slope={m['cluster_power_A']['recovered']:.2f}/{SLOPES[b]} ({elapsed:.1f} s)")
    return record(5, ok, "; ".join(parts))


def _criterion_6(ensembles):
    ok = True
    parts = []
    for b in BANDS:
        rep, analyses, _ = ensembles[b]
        m = rep.metrics
        strict = sum(a.stats.n_paths_30db > a.stats.n_paths_15db for a in analyses)
        ok &= m["delay_spread_ns"]["pass"] and m["azimuth_spread_deg"]["pass"] and strict == len(analyses)
        parts.append(f"{b} DS={m['delay_spread_ns']['recovered']:.1f} ns AS={m['azimuth_spread_deg']['recovered']:.1f} "
                     f"deg n30>n15 on {strict}/{len(analyses)} links")
    n28 = ensembles["B28"][0].metrics["N_mean"]["recovered"]
    n140 = ensembles["B140"][0].metrics["N_mean"]["recovered"]
    ok &= n28 > n140
    parts.append(f"N(B28)={n28:.2f} > N(B140)={n140:.2f}")
    return record(6, ok, "; ".join(parts))


@pytest.mark.parametrize("band", BANDS)
def test_criterion_5_cluster_counts(ensembles, band):
    _criterion_5(ensembles)
    rep, _, elapsed = ensembles[band]
    assert rep.metrics["N_mean"]["pass"] and rep.metrics["M_mean"]["pass"]
    assert elapsed < 120


@pytest.mark.parametrize("band", BANDS)
def test_criterion_5_cluster_power_slope(ensembles, band):
    # both bands converge about 0.5 dB/decade inside the window; single
    # 500-link ensembles scatter by about 0.4 dB/decade around that
    assert ensembles[band][0].metrics["cluster_power_A"]["pass"]


@pytest.mark.parametrize("band", BANDS)
def test_criterion_6_spreads(ensembles, band):
    _criterion_6(ensembles)
    m = ensembles[band][0].metrics
    assert m["delay_spread_ns"]["pass"] and m["azimuth_spread_deg"]["pass"]


def test_criterion_6_cluster_count_ordering(ensembles):
    assert ensembles["B28"][0].metrics["N_mean"]["recovered"] > ensembles["B140"][0].metrics["N_mean"]["recovered"]


def test_criterion_6_path_counts_ordered_on_average(ensembles):
    for b in BANDS:
        a = ensembles[b][1]
        assert np.mean([x.stats.n_paths_30db for x in a]) > np.mean([x.stats.n_paths_15db for x in a])


@pytest.mark.xfail(strict=True, reason=(
    "links drawn with one cluster of one ray, or with every ray within 15 dB of the "
    "strongest, have n30 == n15; the clipped count draws make such links unavoidable"))
@pytest.mark.parametrize("band", BANDS)
def test_criterion_6_path_counts_every_link(ensembles, band):
    assert all(a.stats.n_paths_30db > a.stats.n_paths_15db for a in ensembles[band][1])


# -- 7. free-space anchors ----------------------------------------------------

def test_criterion_7_free_space():
    f28 = friis_fspl(1.0, B28.center_frequency)
    f140 = friis_fspl(1.0, B140.center_frequency)
    offsets = [friis_fspl(d, B140.center_frequency) - friis_fspl(d, B28.center_frequency)
               for d in np.geomspace(0.1, 1000, 50)]
    ok = abs(f28 - 61.54) <= 0.01 and abs(f140 - 75.56) <= 0.01 and all(abs(o - 14.02) <= 0.01 for o in offsets)
    record(7, ok, f"fspl(1 m)={f28:.3f}/{f140:.3f} dB, offset {min(offsets):.4f}..{max(offsets):.4f} dB")
    assert ok


# -- 8. determinism -------------------------------------------------------------

def test_criterion_8_determinism(tmp_path):
    import json

    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(demo_config(seed=SEED)))
    runs = {"serial_a": ["--threads", "1"], "serial_b": ["--threads", "1"], "threads": ["--threads", "4"]}
    for name, flags in runs.items():
        assert cli_main(["pipeline", str(cfg), "--out", str(tmp_path / name), *flags]) == 0
    ref = tmp_path / "serial_a"
    files = sorted(p.relative_to(ref) for p in ref.rglob("*") if p.is_file())
    diffs = [str(f) for f in files for other in ("serial_b", "threads")
             if (tmp_path / other / f).read_bytes() != (ref / f).read_bytes()]
    ok = bool(files) and not diffs
    record(8, ok, f"{len(files)} output files byte-identical across two serial runs and a 4-thread run"
                  if ok else f"differing files: {diffs[:5]}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
