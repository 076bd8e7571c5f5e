import json
from importlib import resources

import jsonschema
import pytest
from referencing import Registry, Resource

from dualband import io as fio
from dualband.generator import band_model
from dualband.pipeline import demo_config, run_pipeline


def _registry():
    resources_ = []
    for f in resources.files("dualband.schemas").iterdir():
        if f.name.endswith(".json"):
            doc = json.loads(f.read_text())
            resources_.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources_)


REGISTRY = _registry()


def check(name, instance):
    schema = REGISTRY.contents(f"{name}.schema.json")
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(instance)


@pytest.fixture(scope="module")
def run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = demo_config(links_per_band=2)
    cfg["stages"] = cfg["stages"] + ["generate"]
    cfg["generate"] = {"n_links": 3}
    run_pipeline(cfg, out=out)
    return cfg, out


def test_all_schemas_are_valid():
    for f in resources.files("dualband.schemas").iterdir():
        if f.name.endswith(".json"):
            jsonschema.Draft202012Validator.check_schema(json.loads(f.read_text()))


def test_outputs_conform(run):
    cfg, out = run
    check("pipeline_config", cfg)
    check("report", fio.read_json(out / "report.json"))
    check("fit_report", fio.read_json(out / "fit_B28.json"))
    check("ensemble_manifest", fio.read_json(out / "links_B28.json"))
    check("ensemble_manifest", fio.read_json(out / "generated" / "B140" / "manifest.json"))
    padp = next((out / "padp").glob("*.padp"))
    check("padp_header", json.loads(padp.read_text().splitlines()[0]))
    scene = next((out / "scenes").glob("*.scene"))
    check("scene_header", json.loads(scene.read_text().splitlines()[0]))
    check("band_model", band_model("B28").to_dict())


def test_csv_headers_match_schema(run):
    _, out = run
    cols = REGISTRY.contents("csv_columns.schema.json")["properties"]
    mpc = next((out / "mpc").glob("*.csv")).read_text().splitlines()[0]
    assert mpc.split(",") == cols["mpc"]["const"]
    assert (out / "linkstats_B28.csv").read_text().splitlines()[0].split(",") == cols["linkstats"]["const"]
    cl = next((out / "clusters").glob("*.csv")).read_text().splitlines()[0]
    assert cl.split(",") == cols["clusters"]["const"]
