"""Config-driven end-to-end run: synth, extract, analyze, cluster, fit,
generate, validate and compare, plus report tables and plot data.

All randomness derives from the config's top-level ``seed`` through
:func:`~dualband.generator.derive_seed` with the stage name, band label and
link index as parts, so per-link work can run on threads without changing
any output.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as fio
from .data import BandConfig, BandLabel, band_config
from .extract import extract_mpcs
from .fitting import (
    BandReport,
    compare_bands,
    gaussian_pas,
    von_mises_pas,
)
from .generator import (
    ROUNDTRIP_CUTOFF,
    ROUNDTRIP_ZETA,
    BandModel,
    analyze_link,
    band_model,
    derive_seed,
    generate_ensemble,
    generate_link,
    log_uniform_distances,
    summarize,
    validate_roundtrip,
)
from .metrics import friis_fspl
from .sounder import Scene, synthesize_padp

STAGES = ("synth", "extract", "analyze", "cluster", "fit", "generate", "validate", "compare")
PLOT_KINDS = ("pathloss_scatter", "pas_fit", "cluster_power", "spread_bars")
REPORT_FORMAT = "dualband-report/1"
PLOT_COLUMNS = ("band", "x", "y", "series")
N_LINE_POINTS = 100

_CONFIG_KEYS = {
    "seed", "stages", "bands", "links_per_band", "distance_range", "inputs",
    "synth", "extract", "analyze", "cluster", "generate", "validate", "compare",
}


class PipelineError(RuntimeError):
    """A stage failed; the message is prefixed with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class ConfigError(PipelineError):
    def __init__(self, message: str):
        super().__init__("config", message)


@dataclass
class PipelineConfig:
    """Parsed run configuration.

    Relative paths inside the config are resolved against ``base_dir``
    (the directory of the config file).
    """

    seed: int = 0
    stages: tuple = ("synth", "extract", "analyze", "cluster", "fit", "compare")
    bands: dict = field(default_factory=lambda: {BandLabel.B28: None, BandLabel.B140: None})
    links_per_band: int = 8
    distance_range: tuple = (3.0, 65.0)
    inputs: dict = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    extract: dict = field(default_factory=dict)
    analyze: dict = field(default_factory=dict)
    cluster: dict = field(default_factory=dict)
    generate: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "PipelineConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(d) - _CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kw = {"base_dir": Path(base_dir)}
        if "seed" in d:
            if not isinstance(d["seed"], int) or isinstance(d["seed"], bool):
                raise ConfigError(f"seed must be an integer, got {d['seed']!r}")
            kw["seed"] = d["seed"]
        if "stages" in d:
            stages = tuple(d["stages"])
            bad = [s for s in stages if s not in STAGES]
            if bad:
                raise ConfigError(f"unknown stages {bad}; valid stages: {', '.join(STAGES)}")
            if not stages:
                raise ConfigError("no stages declared")
            kw["stages"] = stages
        if "bands" in d:
            try:
                kw["bands"] = {BandLabel(k): v for k, v in d["bands"].items()}
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if "links_per_band" in d:
            n = d["links_per_band"]
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f"links_per_band must be a positive integer, got {n!r}")
            kw["links_per_band"] = n
        if "distance_range" in d:
            lo, hi = (float(v) for v in d["distance_range"])
            if not 0 < lo <= hi:
                raise ConfigError(f"invalid distance_range {d['distance_range']!r}")
            kw["distance_range"] = (lo, hi)
        for key in ("inputs", "synth", "extract", "analyze", "cluster", "generate", "validate", "compare"):
            if key in d:
                if not isinstance(d[key], dict):
                    raise ConfigError(f"{key} must be an object")
                kw[key] = dict(d[key])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(d, path.parent)

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p


@dataclass
class _Link:
    link_id: str
    band: BandLabel
    distance: float
    padp: Path | None = None
    mpc: Path | None = None
    analysis: object = None


def _map(fn, items, threads: int):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _rel(path: Path, out: Path) -> str:
    return Path(path).relative_to(out).as_posix()


class _Run:
    def __init__(self, cfg: PipelineConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = Path(out)
        self.threads = max(1, int(threads))
        self.bands: dict[BandLabel, BandConfig] = {}
        for label, spec in cfg.bands.items():
            if spec is None:
                self.bands[label] = band_config(label)
            elif isinstance(spec, dict):
                self.bands[label] = BandConfig.from_dict(spec)
            else:
                path = cfg.resolve(spec)
                if not path.is_file():
                    raise ConfigError(f"missing band config file: {path}")
                self.bands[label] = BandConfig.from_dict(fio.read_json(path))
        self.links: list[_Link] = []
        self.reports: dict[BandLabel, BandReport] = {}
        self.report = {
            "format": REPORT_FORMAT,
            "seed": cfg.seed,
            "stages": list(cfg.stages),
            "status": {},
            "bands": {b.value: {"band": self.bands[b].to_dict()} for b in self.bands},
        }
        self.validations_passed = True

    def band_links(self, label):
        return sorted((l for l in self.links if l.band is label), key=lambda l: l.link_id)

    def subdir(self, name) -> Path:
        d = self.out / name
        d.mkdir(parents=True, exist_ok=True)
        return d

    # -- stages -------------------------------------------------------------

    def synth(self):
        opts = self.cfg.synth
        noise = opts.get("noise", "constant")
        lo, hi = self.cfg.distance_range
        n = self.cfg.links_per_band
        scenes_dir, padp_dir = self.subdir("scenes"), self.subdir("padp")
        jobs = []
        for label, band in self.bands.items():
            model = band_model(label)
            model = BandModel.from_dict({**model.to_dict(), "distance_range": [min(lo, 3.0), max(hi, 65.0)]})
            for i, d in enumerate(np.geomspace(lo, hi, n)):
                jobs.append((label, band, model, i, float(d)))

        def one(job):
            label, band, model, i, d = job
            link_id = f"{label.value}-{i:03d}"
            real = generate_link(model, d, derive_seed(self.cfg.seed, "synth", label.value, i), link_id)
            top = max(m.path_gain for m in real.mpcs)
            mpcs = tuple(m for m in real.mpcs if m.path_gain >= top - band.pdp_dynamic_range)
            scene = Scene(mpcs, band, d, link_id=link_id)
            scene_path = scenes_dir / f"{link_id}.scene"
            fio.write_scene_file(scene, scene_path)
            padp = synthesize_padp(scene, seed=derive_seed(self.cfg.seed, "noise", label.value, i), noise=noise)
            padp_path = padp_dir / f"{link_id}.padp"
            fio.write_padp_file(padp, padp_path)
            return _Link(link_id, label, d, padp=padp_path)

        self.links = _map(one, jobs, self.threads)

    def extract(self):
        if not any(l.padp for l in self.links):
            paths = self.cfg.inputs.get("padp", [])
            if not paths:
                raise PipelineError("extract", "no PADP inputs; declare the synth stage or inputs.padp")
            for p in paths:
                path = self.cfg.resolve(p)
                if not path.is_file():
                    raise PipelineError("extract", f"missing input file: {path}")
            self.links = [_Link("", None, 0.0, padp=self.cfg.resolve(p)) for p in paths]
        opts = self.cfg.extract
        mpc_dir = self.subdir("mpc")

        def one(link):
            try:
                padp = fio.parse_padp_file(link.padp)
            except fio.ParseError as exc:
                raise PipelineError("extract", str(exc)) from None
            label = padp.band.band_label
            if label not in self.bands:
                raise PipelineError("extract", f"{link.padp}: band {label.value} is not configured")
            mpcs = extract_mpcs(padp, threshold_db=float(opts.get("threshold_db", 30.0)),
                                min_snr_db=float(opts.get("min_snr_db", 6.0)),
                                delay_refinement=opts.get("delay_refinement", "pulse"))
            if not mpcs:
                raise PipelineError("extract", f"{link.padp}: no MPCs above the noise floor")
            path = mpc_dir / f"{padp.link_id}.mpc.csv"
            fio.write_mpc_csv(mpcs, path)
            return _Link(padp.link_id, label, padp.tx_rx_distance, padp=link.padp, mpc=path)

        self.links = sorted(_map(one, self.links, self.threads), key=lambda l: l.link_id)
        for label in self.bands:
            links = [{"link_id": l.link_id, "distance": l.distance, "path": _rel(l.mpc, self.out)}
                     for l in self.band_links(label)]
            if links:
                fio.write_manifest(label.value, links, self.out / f"links_{label.value}.json")

    def _ensure_mpcs(self, stage):
        if any(l.mpc for l in self.links):
            return
        entries = self.cfg.inputs.get("mpc", [])
        if not entries:
            raise PipelineError(stage, "no MPC inputs; declare the extract stage or inputs.mpc")
        links = []
        for e in entries:
            path = self.cfg.resolve(e["path"])
            if not path.is_file():
                raise PipelineError(stage, f"missing input file: {path}")
            links.append(_Link(e.get("link_id", path.name.split(".")[0]), BandLabel(e["band"]),
                               float(e["distance"]), mpc=path))
        self.links = sorted(links, key=lambda l: l.link_id)

    def _clustering(self):
        c = self.cfg.cluster
        return float(c.get("zeta", ROUNDTRIP_ZETA)), float(c.get("cutoff", ROUNDTRIP_CUTOFF))

    def analyze(self):
        self._ensure_mpcs("analyze")
        threshold = float(self.cfg.analyze.get("threshold_db", 30.0))
        zeta, cutoff = self._clustering()

        def one(link):
            try:
                mpcs = fio.read_mpc_csv(link.mpc)
            except (fio.ParseError, FileNotFoundError) as exc:
                raise PipelineError("analyze", str(exc)) from None
            link.analysis = analyze_link(mpcs, link.link_id, link.distance, zeta, cutoff, threshold)
            return link

        self.links = _map(one, self.links, self.threads)
        for label in self.bands:
            links = self.band_links(label)
            if not links:
                continue
            fio.write_linkstats_csv([l.analysis.stats for l in links], self.out / f"linkstats_{label.value}.csv")
            rows = []
            for l in links:
                s = l.analysis.stats
                rows.append({
                    "link_id": l.link_id,
                    "distance": l.distance,
                    "omni_pathloss_db": s.omni_pathloss,
                    "delay_spread_ns": s.delay_spread * 1e9,
                    "azimuth_spread_deg": s.azimuth_spread,
                    "n_paths_30db": s.n_paths_30db,
                    "n_paths_15db": s.n_paths_15db,
                })
            self.report["bands"][label.value]["links"] = rows

    def cluster(self):
        if not any(l.analysis for l in self.links):
            self.analyze()
        zeta, cutoff = self._clustering()
        cl_dir = self.subdir("clusters")
        for label in self.bands:
            links = self.band_links(label)
            if not links:
                continue
            rows, samples = [], []
            for l in links:
                cset = l.analysis.clusters
                fio.write_cluster_csv(cset, cl_dir / f"{l.link_id}.clusters.csv")
                for k, c in enumerate(cset.clusters):
                    rows.append({
                        "link_id": l.link_id,
                        "cluster_id": k,
                        "distance": c.distance,
                        "power_db": c.power,
                        "centroid_delay_ns": c.centroid_delay * 1e9,
                        "centroid_azimuth_deg": c.centroid_azimuth,
                        "size": c.size,
                    })
                samples.extend([list(s) for s in l.analysis.pas_samples])
            b = self.report["bands"][label.value]
            b["clusters"] = rows
            b["pas_samples"] = samples
            b["clustering"] = {"zeta": zeta, "cutoff": cutoff}
            for row, l in zip(b.get("links", []), links):
                row["n_clusters"] = l.analysis.clusters.n_clusters

    def fit(self):
        if not any(l.analysis for l in self.links):
            self.analyze()
        for label, band in self.bands.items():
            links = self.band_links(label)
            if not links:
                continue
            s = summarize([l.analysis for l in links])
            rep = BandReport(band, s["pathloss"], s["cluster_power"], s["pas_gaussian"], s["pas_von_mises"],
                             s["mean_delay_spread"], s["mean_azimuth_spread"], s["n_stats"], s["m_stats"])
            self.reports[label] = rep
            self.report["bands"][label.value]["fit"] = rep.to_dict()
            fio.write_json(rep.to_dict(), self.out / f"fit_{label.value}.json")

    def generate(self):
        opts = self.cfg.generate
        n = int(opts.get("n_links", 20))
        for label in self.bands:
            model = self._model(label, opts)
            rng = np.random.default_rng(derive_seed(self.cfg.seed, "generate", label.value, "distances"))
            lo, hi = model.distance_range
            distances = log_uniform_distances(rng, n, lo, hi)
            seeds = [derive_seed(self.cfg.seed, "generate", label.value, i) for i in range(n)]
            links = generate_ensemble(model, distances, seeds, threads=self.threads)
            gdir = self.subdir(f"generated/{label.value}")
            entries = []
            for i, r in enumerate(links):
                link_id = f"gen-{label.value}-{i:04d}"
                path = gdir / f"{link_id}.mpc.csv"
                fio.write_mpc_csv(sorted(r.mpcs, key=lambda m: (m.delay, m.aoa_azimuth)), path)
                entries.append({"link_id": link_id, "distance": r.distance, "path": path.name,
                                "seed": r.seed, "shadowing_db": r.shadowing_draw, "pathloss_db": r.pathloss})
            fio.write_manifest(label.value, entries, gdir / "manifest.json", model=model.to_dict())
            self.report["bands"][label.value]["generate"] = {
                "n_links": n, "manifest": _rel(gdir / "manifest.json", self.out)}

    def _model(self, label, opts) -> BandModel:
        spec = opts.get("model", {}).get(label.value)
        if spec is None:
            return band_model(label, opts.get("pas_model", "Gaussian"))
        if isinstance(spec, dict):
            return BandModel.from_dict({"band_label": label.value, **spec})
        path = self.cfg.resolve(spec)
        if not path.is_file():
            raise PipelineError("generate", f"missing model file: {path}")
        return BandModel.from_dict({"band_label": label.value, **fio.read_json(path)})

    def validate(self):
        opts = self.cfg.validate
        n = int(opts.get("n_links", 500))
        zeta, cutoff = self._clustering()
        for label in self.bands:
            model = self._model(label, opts)
            rep = validate_roundtrip(model, n, seed=derive_seed(self.cfg.seed, "validate", label.value),
                                     tolerances=opts.get("tolerances"), zeta=zeta, cutoff=cutoff,
                                     threads=self.threads)
            self.report["bands"][label.value]["validation"] = rep.to_dict()
            fio.write_json(rep.to_dict(), self.out / f"validation_{label.value}.json")
            self.validations_passed &= rep.passed

    def compare(self):
        if len(self.reports) < 2:
            if not any(l.analysis for l in self.links):
                raise PipelineError("compare", "needs fitted reports for two bands; declare the fit stage")
            self.fit()
        labels = sorted(self.reports, key=lambda b: b.value)
        if len(labels) != 2:
            raise PipelineError("compare", f"needs exactly two bands, got {[b.value for b in labels]}")
        a, b = (self.reports[BandLabel.B28], self.reports[BandLabel.B140]) \
            if set(labels) == {BandLabel.B28, BandLabel.B140} else (self.reports[labels[0]], self.reports[labels[1]])
        try:
            comp = compare_bands(a, b, self.cfg.compare.get("thresholds"))
        except ValueError as exc:
            raise PipelineError("compare", str(exc)) from None
        doc = {"a": a.band.band_label.value, "b": b.band.band_label.value, **comp.to_dict()}
        self.report["comparison"] = doc
        fio.write_json(doc, self.out / "comparison.json")


def run_pipeline(config, out=None, threads: int = 1) -> tuple[int, dict]:
    """Execute the declared stages and write the combined report.

    Parameters
    ----------
    config : PipelineConfig, dict or path
    out : path, optional
        Output directory; defaults to ``run`` next to the config.
    threads : int
        Worker threads for per-link work.  Outputs do not depend on it.

    Returns
    -------
    (status, report)
        ``status`` is 0 iff every stage succeeded and every validation
        passed.  Stage failures raise :class:`PipelineError` after the
        partial report has been written.
    """
    if isinstance(config, PipelineConfig):
        cfg = config
    elif isinstance(config, dict):
        cfg = PipelineConfig.from_dict(config)
    else:
        cfg = PipelineConfig.load(config)
    out = Path(out) if out is not None else cfg.base_dir / "run"
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, out, threads)
    try:
        for stage in cfg.stages:
            try:
                getattr(run, stage)()
            except PipelineError:
                raise
            except (ValueError, OSError) as exc:
                raise PipelineError(stage, str(exc)) from exc
            run.report["status"][stage] = "ok"
    except PipelineError as exc:
        run.report["status"][exc.stage] = f"failed: {exc}"
        run.report["passed"] = False
        fio.write_json(run.report, out / "report.json")
        raise
    run.report["passed"] = run.validations_passed
    fio.write_json(run.report, out / "report.json")
    (out / "tables.txt").write_text(render_tables(run.report))
    return (0 if run.validations_passed else 1), run.report


# -- tables -------------------------------------------------------------------

def _table(title, header, rows) -> str:
    cells = [header] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = [title, "  ".join(h.ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells[1:]]
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def render_tables(report: dict) -> str:
    """Aligned plain-text tables of the fitted band parameters."""
    bands = report.get("bands", {})
    fits = {b: d["fit"] for b, d in sorted(bands.items()) if "fit" in d}
    if not fits:
        return "no fitted bands\n"

    def p(rec, key):
        return None if rec is None else rec["params"][key]

    out = []
    out.append(_table("Omni-directional pathloss", ["band", "A", "B (dB)", "sigma (dB)"], [
        [b, p(f["pathloss"], "A"), p(f["pathloss"], "B"), None if f["pathloss"] is None else f["pathloss"]["sigma"]]
        for b, f in fits.items()]))
    out.append(_table("Mean spreads", ["band", "DS (ns)", "AS (deg)"], [
        [b, f["mean_delay_spread_ns"], f["mean_azimuth_spread_deg"]] for b, f in fits.items()]))
    out.append(_table("Cluster statistics", ["band", "N mean", "N std", "M mean", "M std"], [
        [b, *(f["N"] or [None, None]), *(f["M"] or [None, None])] for b, f in fits.items()]))
    out.append(_table("Power angular spectrum", ["band", "sigma (deg)", "RMSE", "kappa", "RMSE"], [
        [b, p(f["pas_gaussian"], "sigma_deg"), None if f["pas_gaussian"] is None else f["pas_gaussian"]["rmse"],
         p(f["pas_von_mises"], "kappa"), None if f["pas_von_mises"] is None else f["pas_von_mises"]["rmse"]]
        for b, f in fits.items()]))
    out.append(_table("Cluster power vs distance", ["band", "A (dB/dec)", "B (dB)"], [
        [b, p(f["cluster_power"], "A"), p(f["cluster_power"], "B")] for b, f in fits.items()]))
    return "\n".join(out)


# -- plot data ------------------------------------------------------------------

def _need(rows, what, kind):
    if not rows:
        raise ValueError(f"report has no {what} for plot kind {kind!r}")
    return rows


def _line_x(values):
    lo, hi = min(values), max(values)
    return np.geomspace(lo, hi, N_LINE_POINTS)


def plot_rows(report: dict, kind: str) -> list[tuple]:
    """``(band, x, y, series)`` rows for one plot kind."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; valid kinds: {', '.join(PLOT_KINDS)}")
    bands = sorted(report.get("bands", {}).items())
    rows = []
    if kind == "pathloss_scatter":
        pts = [(b, l["distance"], l["omni_pathloss_db"]) for b, d in bands for l in d.get("links", [])]
        _need(pts, "link pathloss", kind)
        rows += [(b, x, y, "measured") for b, x, y in pts]
        xs = _line_x([x for _, x, _ in pts])
        for b, d in bands:
            if d.get("links"):
                fc = d["band"]["center_frequency"]
                rows += [(b, float(x), friis_fspl(float(x), fc), "fspl") for x in xs]
    elif kind == "pas_fit":
        grid = np.linspace(-180.0, 180.0, N_LINE_POINTS)
        for b, d in bands:
            samples = d.get("pas_samples", [])
            fit = d.get("fit", {})
            if not samples or (fit.get("pas_gaussian") is None and fit.get("pas_von_mises") is None):
                continue
            rows += [(b, float(x), float(y), "samples") for x, y in samples]
            if fit.get("pas_gaussian") is not None:
                s = fit["pas_gaussian"]["params"]["sigma_deg"]
                rows += [(b, float(x), float(gaussian_pas(x, s)), "gaussian_fit") for x in grid]
            if fit.get("pas_von_mises") is not None:
                k = fit["pas_von_mises"]["params"]["kappa"]
                rows += [(b, float(x), float(von_mises_pas(x, k)), "von_mises_fit") for x in grid]
        _need(rows, "PAS samples and fits", kind)
    elif kind == "cluster_power":
        for b, d in bands:
            cl = d.get("clusters", [])
            if not cl:
                continue
            rows += [(b, c["distance"], c["power_db"], "clusters") for c in cl]
            cp = d.get("fit", {}).get("cluster_power")
            if cp is not None:
                A, B = cp["params"]["A"], cp["params"]["B"]
                rows += [(b, float(x), A * math.log10(x) + B, "fit") for x in _line_x([c["distance"] for c in cl])]
        _need(rows, "clusters", kind)
    else:
        for b, d in bands:
            for l in d.get("links", []):
                for key in ("delay_spread_ns", "azimuth_spread_deg", "n_paths_30db", "n_paths_15db"):
                    rows.append((b, l["distance"], float(l[key]), key))
        _need(rows, "link statistics", kind)
    return rows


def emit_plot_data(report, kind: str, path=None) -> str:
    """Tidy CSV (``band,x,y,series``) for one plot kind.

    ``report`` is a report dict or the path of a report JSON.  The CSV text
    is returned and, when ``path`` is given, written there.  Model lines
    are sampled at 100 abscissae (log-spaced for distance axes).
    """
    if not isinstance(report, dict):
        report = fio.read_json(report)
    rows = plot_rows(report, kind)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for b, x, y, s in rows:
        w.writerow([b, fio.fmt(x), fio.fmt(y), s])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def demo_config(seed: int = 0, links_per_band: int = 8) -> dict:
    """The default full demo: synthetic links for both bands through compare."""
    return {
        "seed": seed,
        "stages": ["synth", "extract", "analyze", "cluster", "fit", "compare"],
        "bands": {"B28": None, "B140": None},
        "links_per_band": links_per_band,
        "distance_range": [3.0, 65.0],
    }
