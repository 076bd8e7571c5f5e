"""Command-line entry point ``dualband``.

Global flags (``--seed``, ``--out``, ``--config``, ``--threads``) may appear
before or after the subcommand.  The ``DUALBAND_CONFIG`` environment variable
overrides the config path and nothing else.  A config file, when given,
supplies defaults for the flags of the subcommands (a JSON object keyed by
subcommand name, e.g. ``{"extract": {"threshold": 25}}``); the ``pipeline``
subcommand reads it as the run configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .clustering import DEFAULT_CUTOFF, DEFAULT_ZETA, hierarchical_cluster
from .data import BandConfig, BandLabel, band_config
from .extract import extract_mpcs
from .fitting import BandReport, PasModel, compare_bands, fit_cluster_power, fit_pas, fit_pathloss
from .generator import (
    ROUNDTRIP_CUTOFF,
    ROUNDTRIP_ZETA,
    BandModel,
    analyze_link,
    band_model,
    derive_seed,
    generate_ensemble,
    log_uniform_distances,
    summarize,
    validate_roundtrip,
)
from .metrics import link_stats
from .pipeline import PLOT_KINDS, PipelineError, emit_plot_data, render_tables, run_pipeline
from .sounder import synthesize_padp

CONFIG_ENV = "DUALBAND_CONFIG"

FIT_COLUMNS = {
    "pathloss": ("distance_m", "pathloss_db"),
    "clusterpower": ("distance_m", "power_db"),
    "pas": ("offset_deg", "rel_power"),
}


class CliError(Exception):
    pass


def _band(spec: str) -> BandConfig:
    """Preset name (b28, b140) or a band config JSON file."""
    try:
        return band_config(BandLabel(spec.upper()))
    except ValueError:
        pass
    path = Path(spec)
    if not path.is_file():
        raise CliError(f"band {spec!r} is neither b28/b140 nor an existing file")
    try:
        return BandConfig.from_dict(fio.read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: invalid band config: {exc}") from None


def _model(band: str, params: str | None, pas_model: str = "Gaussian") -> BandModel:
    label = BandLabel(band.upper())
    if params is None:
        return band_model(label, pas_model)
    path = Path(params)
    if not path.is_file():
        raise CliError(f"missing model file: {path}")
    d = fio.read_json(path)
    return BandModel.from_dict({"band_label": label.value, **d})


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands ----------------------------------------------------------------

def cmd_synth(args):
    scene = fio.parse_scene_file(args.scene)
    padp = synthesize_padp(scene, seed=args.seed, noise=args.noise)
    out = args.output or str(_out_dir(args) / f"{scene.link_id}.padp")
    fio.write_padp_file(padp, out)
    print(out)


def cmd_extract(args):
    padp = fio.parse_padp_file(args.padp)
    mpcs = extract_mpcs(padp, threshold_db=args.threshold, min_snr_db=args.min_snr,
                        delay_refinement=args.refinement)
    fio.write_mpc_csv(mpcs, args.output)
    print(f"{len(mpcs)} MPCs -> {args.output}")


def cmd_analyze(args):
    if args.batch:
        return _analyze_batch(args)
    if args.band is None or args.distance is None:
        raise CliError("analyze needs --band and --distance (or --batch)")
    _band(args.band)  # validated for symmetry with the batch mode
    mpcs = fio.read_mpc_csv(args.inputs[0])
    link_id = args.link_id or Path(args.inputs[0]).name.split(".")[0]
    stats = link_stats(mpcs, link_id=link_id, threshold_db=args.threshold)
    if args.output:
        fio.write_linkstats_csv([stats], args.output)
    else:
        print(",".join(fio.LINKSTATS_COLUMNS))
        print(",".join(fio.linkstats_row(stats)))


def _analyze_batch(args):
    """Per-band means and fits over one or more ensemble manifests."""
    by_band: dict[str, list] = {}
    for m in args.inputs:
        doc = fio.read_manifest(m)
        for link in doc["links"]:
            mpcs = fio.read_mpc_csv(link["path"])
            a = analyze_link(mpcs, link["link_id"], float(link["distance"]), args.zeta, args.cutoff,
                             args.threshold)
            by_band.setdefault(doc["band"], []).append(a)
    out = _out_dir(args)
    summary = {}
    for band, analyses in sorted(by_band.items()):
        fio.write_linkstats_csv([a.stats for a in analyses], out / f"linkstats_{band}.csv")
        s = summarize(analyses)
        summary[band] = {
            "n_links": len(analyses),
            "mean_delay_spread_ns": s["mean_delay_spread"] * 1e9,
            "mean_azimuth_spread_deg": s["mean_azimuth_spread"],
            "mean_n_paths_30db": float(np.mean([a.stats.n_paths_30db for a in analyses])),
            "mean_n_paths_15db": float(np.mean([a.stats.n_paths_15db for a in analyses])),
        }
    fio.write_json(summary, out / "analyze_summary.json")
    sys.stdout.write(_dump(summary))


def cmd_cluster(args):
    mpcs = fio.read_mpc_csv(args.mpc)
    link_id = Path(args.mpc).name.split(".")[0]
    cset = hierarchical_cluster(mpcs, args.zeta, args.cutoff, link_id=link_id)
    out = _out_dir(args)
    fio.write_cluster_csv(cset, out / f"{link_id}.clusters.csv")
    summary = {
        "link_id": link_id,
        "zeta": args.zeta,
        "cutoff": args.cutoff,
        "n_clusters": cset.n_clusters,
        "clusters": [
            {"size": c.size, "power_db": c.power, "centroid_delay_ns": c.centroid_delay * 1e9,
             "centroid_azimuth_deg": c.centroid_azimuth, "distance_m": c.distance}
            for c in cset.clusters
        ],
    }
    fio.write_json(summary, out / f"{link_id}.clusters.json")
    print(f"{cset.n_clusters} clusters -> {out / (link_id + '.clusters.csv')}")


def cmd_fit(args):
    rows = fio.read_samples_csv(args.samples, FIT_COLUMNS[args.kind])
    if args.kind == "pathloss":
        rec = fit_pathloss(rows).to_dict()
    elif args.kind == "clusterpower":
        rec = fit_cluster_power(rows).to_dict()
    else:
        rec = fit_pas(rows, PasModel(args.model)).to_dict()
    _emit(_dump(rec), args.output)


def cmd_generate(args):
    model = _model(args.band, args.params, args.pas_model)
    rng = np.random.default_rng(derive_seed(args.seed, "generate", "distances"))
    lo, hi = model.distance_range
    distances = log_uniform_distances(rng, args.n, lo, hi)
    seeds = [derive_seed(args.seed, "generate", i) for i in range(args.n)]
    links = generate_ensemble(model, distances, seeds, threads=args.threads)
    out = _out_dir(args)
    entries = []
    label = model.band_label.value if model.band_label else "custom"
    for i, r in enumerate(links):
        link_id = f"gen-{label}-{i:04d}"
        name = f"{link_id}.mpc.csv"
        fio.write_mpc_csv(sorted(r.mpcs, key=lambda m: (m.delay, m.aoa_azimuth)), out / name)
        entries.append({"link_id": link_id, "distance": r.distance, "path": name, "seed": r.seed,
                        "shadowing_db": r.shadowing_draw, "pathloss_db": r.pathloss})
    fio.write_manifest(label, entries, out / "manifest.json", model=model.to_dict(), seed=args.seed)
    print(f"{len(entries)} links -> {out / 'manifest.json'}")


def cmd_validate(args):
    model = _model(args.band, args.params, args.pas_model)
    rep = validate_roundtrip(model, args.n, seed=args.seed, zeta=args.zeta, cutoff=args.cutoff,
                             threads=args.threads)
    text = _dump(rep.to_dict())
    if args.out:
        path = _out_dir(args) / f"validation_{args.band.upper()}.json"
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)
    for name, m in rep.metrics.items():
        status = "pass" if m["pass"] else "FAIL"
        print(f"{status} {name}: recovered {m['recovered']} target {m['target']} +/- {m['tolerance']}",
              file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_compare(args):
    reports = []
    for p in (args.a, args.b):
        try:
            reports.append(BandReport.from_dict(fio.read_json(p)))
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"{p}: not a band fit report: {exc}") from None
    comp = compare_bands(*reports)
    doc = {"a": reports[0].band.band_label.value, "b": reports[1].band.band_label.value, **comp.to_dict()}
    _emit(_dump(doc), args.output)


def cmd_plotdata(args):
    text = emit_plot_data(args.report, args.kind)
    _emit(text, args.output)


def cmd_pipeline(args):
    if args.config is None:
        raise CliError("pipeline needs a run config (--config or $" + CONFIG_ENV + ")")
    status, report = run_pipeline(args.config, out=args.out, threads=args.threads)
    sys.stdout.write(render_tables(report))
    return status


# -- parser -----------------------------------------------------------------------

def _global_flags(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                        help="top-level random seed (default 0)")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--config", default=default, help=f"config file (overridden by ${CONFIG_ENV})")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker threads for per-link work (default 1)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualband", description="Dual-band mmWave channel toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help, description=help)
        sp.set_defaults(func=fn)
        return sp

    sp = add("synth", cmd_synth, "render a scene file to a PADP file")
    sp.add_argument("scene")
    sp.add_argument("output", nargs="?", help="PADP path (default <out>/<link_id>.padp)")
    sp.add_argument("--noise", choices=("constant", "exponential"), default="constant")

    sp = add("extract", cmd_extract, "extract MPCs from a PADP file")
    sp.add_argument("padp")
    sp.add_argument("output")
    sp.add_argument("--threshold", type=float, default=30.0, help="dB below the strongest peak")
    sp.add_argument("--min-snr", type=float, default=6.0, help="dB above the noise floor")
    sp.add_argument("--refinement", choices=("pulse", "parabolic"), default="pulse")

    sp = add("analyze", cmd_analyze, "link statistics of an MPC list, or band means with --batch")
    sp.add_argument("inputs", nargs="+", help="MPC CSV, or ensemble manifests with --batch")
    sp.add_argument("--band", help="b28, b140 or a band config JSON")
    sp.add_argument("--distance", type=float, help="Tx-Rx distance in m")
    sp.add_argument("--link-id")
    sp.add_argument("--batch", action="store_true")
    sp.add_argument("--threshold", type=float, default=30.0)
    sp.add_argument("--zeta", type=float, default=ROUNDTRIP_ZETA)
    sp.add_argument("--cutoff", type=float, default=ROUNDTRIP_CUTOFF)
    sp.add_argument("-o", "--output", help="LinkStats CSV (default stdout)")

    sp = add("cluster", cmd_cluster, "MCD clustering of an MPC list")
    sp.add_argument("mpc")
    sp.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
    sp.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)

    sp = add("fit", cmd_fit, "fit a model to CSV samples")
    sp.add_argument("kind", choices=tuple(FIT_COLUMNS))
    sp.add_argument("samples")
    sp.add_argument("--model", choices=[m.value for m in PasModel], default="Gaussian",
                    help="PAS shape for 'fit pas'")
    sp.add_argument("-o", "--output", help="JSON fit record (default stdout)")

    for name, fn, help in (("generate", cmd_generate, "generate a stochastic link ensemble"),
                           ("validate", cmd_validate, "round-trip validation of a band model")):
        sp = add(name, fn, help)
        sp.add_argument("--band", required=True, type=str.lower, choices=("b28", "b140"))
        sp.add_argument("--params", help="BandModel JSON (default: the band preset)")
        sp.add_argument("--pas-model", choices=[m.value for m in PasModel], default="Gaussian")
        sp.add_argument("--n", type=int, default=500)
        if name == "validate":
            sp.add_argument("--zeta", type=float, default=ROUNDTRIP_ZETA)
            sp.add_argument("--cutoff", type=float, default=ROUNDTRIP_CUTOFF)

    sp = add("compare", cmd_compare, "compare two band fit reports")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("-o", "--output")

    sp = add("plotdata", cmd_plotdata, "tidy CSV plot data from a pipeline report")
    sp.add_argument("report")
    sp.add_argument("--kind", required=True, choices=PLOT_KINDS)
    sp.add_argument("-o", "--output")

    sp = add("pipeline", cmd_pipeline, "run a pipeline config")
    sp.add_argument("run_config", nargs="?", help="run config (same as --config)")
    return p


def _apply_config(parser, args, argv):
    """Fill subcommand defaults from the config file's section."""
    if args.command == "pipeline" or args.config is None:
        return args
    path = Path(args.config)
    if not path.is_file():
        raise CliError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    section = cfg.get(args.command, {}) if isinstance(cfg, dict) else {}
    given = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in section.items():
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise CliError(f"{path}: unknown option {key!r} for {args.command}")
        if key not in given:
            setattr(args, key, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "run_config", None) and args.config is None:
        args.config = args.run_config
    env = os.environ.get(CONFIG_ENV)
    if env:
        args.config = env
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        args = _apply_config(parser, args, argv)
        status = args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CliError, fio.ParseError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
