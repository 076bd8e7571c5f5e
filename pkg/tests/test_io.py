import json
from pathlib import Path

import numpy as np
import pytest

from dualband import io as fio
from dualband.clustering import hierarchical_cluster
from dualband.data import B28, B140, LinkStats, Mpc, Padp
from dualband.sounder import random_scene, synthesize_padp


@pytest.fixture
def padp(rng):
    grid = rng.uniform(-123.0, -60.0, size=(72, 1000))
    return Padp.from_grid(B28, grid, -123.0, link_id="L1", tx_rx_distance=12.5, delay_origin=1e-8)


def test_padp_round_trip_is_bit_exact(tmp_path, padp):
    path = tmp_path / "a.padp"
    fio.write_padp_file(padp, path)
    back = fio.parse_padp_file(path)
    assert back.band == padp.band
    assert back.link_id == "L1"
    assert back.tx_rx_distance == 12.5
    assert back.noise_floor == padp.noise_floor
    np.testing.assert_array_equal(back.power_grid, padp.power_grid)
    np.testing.assert_array_equal(back.delay_axis, padp.delay_axis)
    np.testing.assert_array_equal(back.azimuth_axis, padp.azimuth_axis)


def _rewrite(path, fn):
    lines = Path(path).read_text().splitlines()
    Path(path).write_text("\n".join(fn(lines)) + "\n")


def test_padp_missing_row(tmp_path, padp):
    path = tmp_path / "a.padp"
    fio.write_padp_file(padp, path)

    def drop(lines):
        header = json.loads(lines[0])
        header["azimuth_axis"]["n"] = 71
        return [json.dumps(header)] + lines[1:-1]

    _rewrite(path, drop)
    with pytest.raises(fio.ParseError, match="expected 72 rows"):
        fio.parse_padp_file(path)


def test_padp_bad_delay_resolution(tmp_path, padp):
    path = tmp_path / "a.padp"
    fio.write_padp_file(padp, path)

    def bad(lines):
        header = json.loads(lines[0])
        header["band"]["delay_resolution"] = 0.5e-9
        return [json.dumps(header)] + lines[1:]

    _rewrite(path, bad)
    with pytest.raises(fio.ParseError, match="1/bandwidth"):
        fio.parse_padp_file(path)


def test_padp_non_numeric_cell_names_row_and_column(tmp_path, padp):
    path = tmp_path / "a.padp"
    fio.write_padp_file(padp, path)

    def poison(lines):
        cells = lines[3].split(",")
        cells[4] = "abc"
        lines[3] = ",".join(cells)
        return lines

    _rewrite(path, poison)
    with pytest.raises(fio.ParseError) as err:
        fio.parse_padp_file(path)
    assert err.value.row == 4 and err.value.column == 5
    assert "row 4" in str(err.value) and "column 5" in str(err.value)


def test_padp_malformed_header(tmp_path):
    path = tmp_path / "a.padp"
    path.write_text("not json\n1,2,3\n")
    with pytest.raises(fio.ParseError, match="row 1"):
        fio.parse_padp_file(path)


def test_mpc_csv_round_trip(tmp_path):
    mpcs = [Mpc(12.345e-9, 10.0, -80.5), Mpc(1e-7 / 3, 359.9, -91.25)]
    path = tmp_path / "m.csv"
    fio.write_mpc_csv(mpcs, path)
    assert path.read_text().splitlines()[0] == "delay_ns,aoa_deg,path_gain_db"
    back = fio.read_mpc_csv(path)
    for a, b in zip(mpcs, back):
        assert b.delay == pytest.approx(a.delay, rel=1e-15)
        assert (b.aoa_azimuth, b.path_gain) == (a.aoa_azimuth, a.path_gain)


def test_mpc_csv_bad_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(fio.ParseError, match="expected header"):
        fio.read_mpc_csv(path)


def test_scene_round_trip(tmp_path, rng):
    scene = random_scene(B140, rng, n_mpc=5, link_id="s1")
    path = tmp_path / "s.scene"
    fio.write_scene_file(scene, path)
    back = fio.parse_scene_file(path)
    assert back.link_id == "s1" and back.band == B140 and back.n_delay == scene.n_delay
    assert len(back.mpcs) == 5
    a = synthesize_padp(scene)
    b = synthesize_padp(back)
    np.testing.assert_allclose(a.power_grid, b.power_grid, rtol=0, atol=1e-9)


def test_linkstats_round_trip(tmp_path):
    stats = [LinkStats("a", 80.1, 12e-9, 30.5, 10, 4), LinkStats("b", 90.0, 0.0, 0.0, 1, 1)]
    path = tmp_path / "s.csv"
    fio.write_linkstats_csv(stats, path)
    back = fio.read_linkstats_csv(path)
    assert [s.link_id for s in back] == ["a", "b"]
    assert back[0].delay_spread == pytest.approx(12e-9)
    assert back[0].n_paths_30db == 10


def test_cluster_csv_round_trip(tmp_path):
    mpcs = [Mpc(10e-9, 0, -80), Mpc(10.5e-9, 2, -81), Mpc(80e-9, 180, -90)]
    cset = hierarchical_cluster(mpcs, 8.0, 0.25)
    path = tmp_path / "c.csv"
    fio.write_cluster_csv(cset, path)
    back = fio.read_cluster_csv(path)
    assert sorted(len(v) for v in back.values()) == sorted(c.size for c in cset.clusters)


def test_manifest_resolves_paths(tmp_path):
    fio.write_manifest("B28", [{"link_id": "x", "distance": 5.0, "path": "x.mpc.csv"}],
                       tmp_path / "manifest.json")
    doc = fio.read_manifest(tmp_path / "manifest.json")
    assert doc["links"][0]["path"] == str(tmp_path / "x.mpc.csv")


def test_samples_csv(tmp_path):
    path = tmp_path / "s.csv"
    fio.write_samples_csv([(1.0, 60.0), (10.0, 80.0)], ("distance_m", "pathloss_db"), path)
    assert fio.read_samples_csv(path, ("distance_m", "pathloss_db")) == [(1.0, 60.0), (10.0, 80.0)]
    with pytest.raises(fio.ParseError):
        fio.read_samples_csv(path, ("offset_deg", "rel_power"))


def test_padp_short_body_with_consistent_header(tmp_path, padp):
    path = tmp_path / "a.padp"
    fio.write_padp_file(padp, path)
    _rewrite(path, lambda lines: lines[:-1])
    with pytest.raises(fio.ParseError, match="expected 72 rows"):
        fio.parse_padp_file(path)
