"""Reading and writing the toolkit's text file formats.

PADP and scene files share one container layout: the first line is a
single-line JSON header, every following line is a CSV row.  MPC lists and
link statistics are flat CSV files with a one-line column header.  Floats are
written with ``repr`` so that a write/parse round trip is exact.  The JSON
schemas live in ``dualband/schemas``; ``docs/formats.md`` describes them.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .data import BandConfig, LinkStats, LosState, Mpc, Padp

PADP_FORMAT = "dualband-padp/1"
SCENE_FORMAT = "dualband-scene/1"
MPC_COLUMNS = ("delay_ns", "aoa_deg", "path_gain_db")
CLUSTER_COLUMNS = ("cluster_id",) + MPC_COLUMNS
ENSEMBLE_FORMAT = "dualband-ensemble/1"
LINKSTATS_COLUMNS = (
    "link_id",
    "omni_pathloss_db",
    "delay_spread_ns",
    "azimuth_spread_deg",
    "n_paths_30db",
    "n_paths_15db",
)


class ParseError(ValueError):
    """Malformed input file.  ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, path=None, row=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.row = row
        self.column = column


def fmt(x: float) -> str:
    return repr(float(x))


def _split_container(path: Path) -> tuple[dict, list[str]]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", path, row=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON header ({exc.msg})", path, row=1, column=exc.colno)
    if not isinstance(header, dict):
        raise ParseError("JSON header must be an object", path, row=1)
    return header, lines[1:]


def _require(header: dict, key: str, path, kind=None):
    if key not in header:
        raise ParseError(f"header is missing field '{key}'", path, row=1)
    value = header[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"header field '{key}' has the wrong type", path, row=1)
    return value


def _float_cell(cell: str, path, row: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", path, row=row, column=column) from None
    return value


# -- PADP -------------------------------------------------------------------

def padp_header(padp: Padp) -> dict:
    return {
        "format": PADP_FORMAT,
        "band": padp.band.to_dict(),
        "link_id": padp.link_id,
        "tx_rx_distance": padp.tx_rx_distance,
        "los_state": padp.los_state.value,
        "noise_floor": padp.noise_floor,
        "delay_axis": {
            "start": float(padp.delay_axis[0]),
            "step": padp.band.delay_resolution,
            "n": int(padp.n_delay),
        },
        "azimuth_axis": {
            "start": float(padp.azimuth_axis[0]),
            "step": padp.band.azimuth_step,
            "n": int(padp.n_azimuth),
        },
    }


def write_padp_file(padp: Padp, path) -> None:
    path = Path(path)
    buf = io.StringIO()
    buf.write(json.dumps(padp_header(padp), sort_keys=True))
    buf.write("\n")
    for row in padp.power_grid:
        buf.write(",".join(fmt(v) for v in row))
        buf.write("\n")
    path.write_text(buf.getvalue())


def parse_padp_file(path) -> Padp:
    """Parse a PADP file written by :func:`write_padp_file`.

    Raises
    ------
    ParseError
        On a malformed header, a grid whose shape disagrees with the header
        axes, or a non-numeric cell.  The message names the offending row and
        column (1-based file coordinates).
    """
    header, lines = _split_container(path)
    if header.get("format") != PADP_FORMAT:
        raise ParseError(f"unknown format {header.get('format')!r}, expected {PADP_FORMAT!r}", path, row=1)
    try:
        band = BandConfig.from_dict(_require(header, "band", path, dict))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid band config: {exc}", path, row=1) from None
    d_ax = _require(header, "delay_axis", path, dict)
    a_ax = _require(header, "azimuth_axis", path, dict)
    try:
        n_delay = int(d_ax["n"])
        d_start = float(d_ax["start"])
        d_step = float(d_ax["step"])
        n_az = int(a_ax["n"])
        a_step = float(a_ax["step"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid axis spec: {exc}", path, row=1) from None
    if not math.isclose(d_step, band.delay_resolution, rel_tol=1e-12):
        raise ParseError("delay axis step disagrees with band delay_resolution", path, row=1)
    if not math.isclose(a_step, band.azimuth_step, rel_tol=1e-12):
        raise ParseError("azimuth axis step disagrees with band azimuth_step", path, row=1)
    if n_az != band.n_azimuth:
        raise ParseError(
            f"azimuth axis declares {n_az} bins, expected {band.n_azimuth} rows "
            f"for a {band.azimuth_step:g} deg azimuth step", path, row=1
        )

    rows = [ln for ln in lines if ln.strip()]
    if len(rows) != band.n_azimuth:
        raise ParseError(
            f"expected {band.n_azimuth} rows for a {band.azimuth_step:g} deg azimuth step, "
            f"found {len(rows)}",
            path,
        )
    grid = np.empty((n_az, n_delay), dtype=float)
    for i, line in enumerate(rows):
        cells = line.split(",")
        if len(cells) != n_delay:
            raise ParseError(
                f"expected {n_delay} columns, found {len(cells)}", path, row=i + 2
            )
        for j, cell in enumerate(cells):
            grid[i, j] = _float_cell(cell, path, i + 2, j + 1)

    try:
        return Padp(
            band=band,
            link_id=str(_require(header, "link_id", path)),
            tx_rx_distance=float(_require(header, "tx_rx_distance", path)),
            los_state=LosState(_require(header, "los_state", path)),
            delay_axis=d_start + d_step * np.arange(n_delay, dtype=float),
            azimuth_axis=a_step * np.arange(n_az, dtype=float),
            power_grid=grid,
            noise_floor=float(_require(header, "noise_floor", path)),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), path) from None


# -- MPC lists --------------------------------------------------------------

def _mpc_rows(mpcs):
    for m in mpcs:
        yield (fmt(m.delay * 1e9), fmt(m.aoa_azimuth), fmt(m.path_gain))


def _read_mpc_rows(rows, path, first_row):
    out = []
    for i, cells in enumerate(rows):
        r = first_row + i
        if not cells:
            continue
        if len(cells) != 3:
            raise ParseError(f"expected 3 columns, found {len(cells)}", path, row=r)
        delay = _float_cell(cells[0], path, r, 1)
        aoa = _float_cell(cells[1], path, r, 2)
        gain = _float_cell(cells[2], path, r, 3)
        try:
            out.append(Mpc(delay * 1e-9, aoa, gain))
        except ValueError as exc:
            raise ParseError(str(exc), path, row=r) from None
    return out


def write_mpc_csv(mpcs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MPC_COLUMNS)
        w.writerows(_mpc_rows(mpcs))


def read_mpc_csv(path) -> list[Mpc]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != MPC_COLUMNS:
        raise ParseError(f"expected header {','.join(MPC_COLUMNS)}", path, row=1)
    return _read_mpc_rows(rows[1:], path, 2)


# -- scenes -----------------------------------------------------------------

def write_scene_file(scene, path) -> None:
    header = {
        "format": SCENE_FORMAT,
        "band": scene.band.to_dict(),
        "link_id": scene.link_id,
        "tx_rx_distance": scene.tx_rx_distance,
        "los_state": scene.los_state.value,
        "n_delay": scene.n_delay,
        "noise_floor": scene.noise_floor,
        "columns": list(MPC_COLUMNS),
    }
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(_mpc_rows(scene.mpcs))
    Path(path).write_text(buf.getvalue())


def parse_scene_file(path):
    from .sounder import Scene

    header, lines = _split_container(path)
    if header.get("format") != SCENE_FORMAT:
        raise ParseError(f"unknown format {header.get('format')!r}, expected {SCENE_FORMAT!r}", path, row=1)
    try:
        band = BandConfig.from_dict(_require(header, "band", path, dict))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid band config: {exc}", path, row=1) from None
    rows = list(csv.reader(lines))
    mpcs = _read_mpc_rows(rows, path, 2)
    noise = header.get("noise_floor")
    try:
        return Scene(
            mpcs=tuple(mpcs),
            band=band,
            tx_rx_distance=float(_require(header, "tx_rx_distance", path)),
            los_state=LosState(header.get("los_state", "LOS")),
            link_id=str(header.get("link_id", Path(path).stem)),
            n_delay=header.get("n_delay"),
            noise_floor=None if noise is None else float(noise),
        )
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


# -- link statistics ----------------------------------------------------------

def linkstats_row(s: LinkStats) -> list[str]:
    return [
        s.link_id,
        fmt(s.omni_pathloss),
        fmt(s.delay_spread * 1e9),
        fmt(s.azimuth_spread),
        str(s.n_paths_30db),
        str(s.n_paths_15db),
    ]


def write_linkstats_csv(stats, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LINKSTATS_COLUMNS)
        for s in stats:
            w.writerow(linkstats_row(s))


def read_linkstats_csv(path) -> list[LinkStats]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != LINKSTATS_COLUMNS:
        raise ParseError(f"expected header {','.join(LINKSTATS_COLUMNS)}", path, row=1)
    out = []
    for i, cells in enumerate(rows[1:], start=2):
        if not cells:
            continue
        if len(cells) != len(LINKSTATS_COLUMNS):
            raise ParseError(f"expected {len(LINKSTATS_COLUMNS)} columns, found {len(cells)}", path, row=i)
        nums = [_float_cell(c, path, i, j) for j, c in enumerate(cells[1:4], start=2)]
        try:
            n30, n15 = int(cells[4]), int(cells[5])
        except ValueError:
            raise ParseError("path counts must be integers", path, row=i) from None
        out.append(LinkStats(cells[0], nums[0], nums[1] * 1e-9, nums[2], n30, n15))
    return out


# -- clusters ---------------------------------------------------------------

def write_cluster_csv(cset, path) -> None:
    """Member MPCs tagged with their cluster index."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CLUSTER_COLUMNS)
        for k, c in enumerate(cset.clusters):
            for row in _mpc_rows(c.members):
                w.writerow((str(k),) + row)


def read_cluster_csv(path) -> dict[int, list[Mpc]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != CLUSTER_COLUMNS:
        raise ParseError(f"expected header {','.join(CLUSTER_COLUMNS)}", path, row=1)
    out: dict[int, list[Mpc]] = {}
    for i, cells in enumerate(rows[1:], start=2):
        if not cells:
            continue
        if len(cells) != len(CLUSTER_COLUMNS):
            raise ParseError(f"expected {len(CLUSTER_COLUMNS)} columns, found {len(cells)}", path, row=i)
        try:
            k = int(cells[0])
        except ValueError:
            raise ParseError(f"cluster_id must be an integer, got {cells[0]!r}", path, row=i, column=1) from None
        out.setdefault(k, []).extend(_read_mpc_rows([cells[1:]], path, i))
    return out


# -- numeric sample tables ----------------------------------------------------

def read_samples_csv(path, columns) -> list[tuple]:
    """Rows of floats from a CSV whose header equals ``columns``."""
    columns = tuple(columns)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != columns:
        raise ParseError(f"expected header {','.join(columns)}", path, row=1)
    out = []
    for i, cells in enumerate(rows[1:], start=2):
        if not cells:
            continue
        if len(cells) != len(columns):
            raise ParseError(f"expected {len(columns)} columns, found {len(cells)}", path, row=i)
        out.append(tuple(_float_cell(c, path, i, j) for j, c in enumerate(cells, start=1)))
    return out


def write_samples_csv(rows, columns, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) for v in r])


# -- ensemble manifests -------------------------------------------------------

def write_manifest(band_label, links, path, **extra) -> None:
    """Manifest of per-link MPC files.

    ``links`` holds dicts with at least ``link_id``, ``distance`` and ``path``
    (relative to the manifest's directory).
    """
    doc = {"format": ENSEMBLE_FORMAT, "band": str(band_label), "links": list(links)}
    doc.update(extra)
    write_json(doc, path)


def read_manifest(path) -> dict:
    try:
        doc = read_json(path)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, row=exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("format") != ENSEMBLE_FORMAT:
        raise ParseError(f"not an ensemble manifest (format {ENSEMBLE_FORMAT!r})", path)
    base = Path(path).parent
    for i, link in enumerate(doc.get("links", [])):
        for key in ("link_id", "distance", "path"):
            if key not in link:
                raise ParseError(f"link {i} lacks {key!r}", path)
        link["path"] = str(base / link["path"])
    return doc


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)
