import json
import math
import os
from pathlib import Path

import pytest

import liver

CONFIGS = Path(os.environ.get("LIVER_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_version_and_features():
    assert liver.__version__ == liver.version()
    assert liver.feature_names()[0] == "tc"
    assert "rssi_avg_dbm" in liver.feature_names()


def test_default_schedule_is_valid():
    s = liver.Schedule()
    assert s.validate() == []
    assert s.strategy == "dmpg"
    assert s.max_uncovered_gap() == 180_000
    phases = [w[0] for w in s.timeline()]
    assert phases[0] == "SC" and phases.count("DC") == s.effective_ni()


def test_broken_schedule_reports_the_inequality():
    s = liver.Schedule()
    s.t_dc_gap = 300_000
    names = [v[0] for v in s.validate()]
    assert names == ["contact_exceeds_dc_split"]
    name, _, lhs, rhs = s.validate()[0]
    assert lhs == 250_000 and rhs == 340_000


def test_traffic_is_seeded_and_ordered():
    a = liver.generate_traffic(120, 3.0, seed=5)
    b = liver.generate_traffic(120, 3.0, seed=5)
    assert a == b
    arrivals = [v["arrival_us"] for v in a]
    assert arrivals == sorted(arrivals)
    assert {v["class"] for v in a} <= {"S", "M", "L"}
    assert 20 <= len(a) <= 60


def test_flood_on_a_line_matches_hop_distance():
    pos = [(10.0 * i, 0.0) for i in range(8)]
    out = liver.flood_disc(pos, range_m=10.5, initiator=0)
    assert all(n["received"] for n in out)
    assert [n["relay_count"] for n in out] == list(range(8))


def test_train_predict_roundtrip():
    x = [[float(i % 7) / 7, 0.1] for i in range(30)] + [[3 + float(i % 5) / 5, 2.0] for i in range(30)]
    y = ["N"] * 30 + ["V"] * 30
    model = liver.train(x, y, features=["a", "b"], kernel="linear")
    assert model.classes == ["N", "V"]
    assert model.predict([0.2, 0.1]) == "N"
    assert model.predict([3.5, 2.0]) == "V"
    again = liver.Model.from_json(model.to_json())
    assert json.loads(again.to_json()) == json.loads(model.to_json())
    cm = liver.evaluate(model, x, y)
    assert cm["overall_accuracy"] == 1.0


def test_training_needs_two_classes():
    with pytest.raises(liver.LiverError, match="at least two classes"):
        liver.train([[0.0]] * 12, ["N"] * 12)


def test_config_errors_carry_a_line():
    with pytest.raises(liver.ConfigError, match=r"^t\.yaml:2:"):
        liver.Config.parse("schedule:\n  gp_mss: 5\n", "t.yaml")


def test_config_roundtrip_and_small_sweep(tmp_path):
    rc = liver.Config.load(str(CONFIGS / "gp.yaml"))
    assert liver.Config.parse(rc.dump()).dump() == rc.dump()
    rc.periods = 200
    rc.seeds = [1]
    rc.sweep_values = [0.5, 1.0]
    res = liver.run_sweep(rc)
    assert res["axis"] == "gp"
    assert [r["value"] for r in res["records"]] == ["0.5", "1"]
    for r in res["records"]:
        assert 0.0 <= r["metrics"]["accuracy"] <= 1.0

    rc.output_dir = str(tmp_path / "a")
    first = liver.run_sweep_to_dir(rc, 2)
    again = liver.Config.parse((tmp_path / "a" / "manifest.json").read_text(), "manifest.json")
    again.output_dir = str(tmp_path / "b")
    assert liver.run_sweep_to_dir(again) == first
    assert (tmp_path / "a" / "gp_metrics.csv").read_bytes() == (tmp_path / "b" / "gp_metrics.csv").read_bytes()


def test_experiment_rows_are_labelled():
    rc = liver.Config()
    rc.periods = 40
    rows = liver.experiment_rows(rc)
    assert len(rows) == 40
    assert all(r["label"] in {"N", "S", "M", "L", "S-mix", "M-mix", "L-mix"} for r in rows)
    assert all(0.0 <= r["r"] <= 1.0 and not math.isnan(r["lt_us"]) for r in rows)
