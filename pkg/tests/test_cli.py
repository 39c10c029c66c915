import csv
import io
import json

import pytest

from yolotraffic import cli, evaldata, loss, postprocess
from yolotraffic.evaldata import RateRow, SuccessRateReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == 0
    assert "photos=507" in out and "trials=16/18/81/54" in out


def test_validate_missing_record():
    buf = io.StringIO()
    assert cli.cmd_validate(evaldata.embedded_dataset()[:-1], out=buf) == 1
    assert buf.getvalue().startswith("FAIL photo-count")
    assert "cardinality" in buf.getvalue()


def test_validate_rate_over_100():
    buf = io.StringIO()
    bad = [SuccessRateReport(3, [RateRow(40, 28, 27, 103.7)])]
    assert cli.cmd_validate(reports=bad, out=buf) == 1
    assert "rate-bounds" in buf.getvalue()


def test_rates_experiment_3(capsys):
    code, out, _ = run(capsys, "rates", "--experiment", "3")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["experiment", "distance_ft", "passes", "total", "rate_pct"]
    assert rows[1:] == [["3", "40", "22", "27", "81.48"], ["3", "50", "21", "27", "77.78"], ["3", "60", "12", "27", "44.44"]]


def test_rates_experiment_2_json(capsys):
    code, out, _ = run(capsys, "rates", "--experiment", "2", "--format", "json")
    rep = json.loads(out)
    assert rep["experiment"] == 2
    row60 = [r for r in rep["rows"] if r["distance_ft"] == 60][0]
    assert (row60["passes"], row60["total"]) == (3, 3)


def test_rates_experiment_1_ten_feet(capsys):
    _, out, _ = run(capsys, "rates", "--experiment", "1", "--format", "json")
    assert json.loads(out)["rows"][0] == {"distance_ft": 10, "passes": 1, "total": 1, "rate_pct": 100.0}


def test_rates_bad_experiment(capsys):
    code, _, err = run(capsys, "rates", "--experiment", "7")
    assert code == 2 and "1..4" in err


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "rates")[0] == 2


def test_figure6_csv_and_determinism(capsys):
    _, a, _ = run(capsys, "figure6")
    _, b, _ = run(capsys, "figure6")
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert [r["rate_pct"] for r in rows] == ["81.48", "77.78", "44.44", "94.44", "38.89", "16.67"]
    assert sum(bool(r["note"]) for r in rows) == 2


def test_figure6_json(capsys):
    _, out, _ = run(capsys, "figure6", "--format", "json")
    e3, e4 = json.loads(out)
    assert [r["rate_pct"] for r in e3["rows"]] == [81.48, 77.78, 44.44]
    assert [r["rate_pct"] for r in e4["rows"]] == [94.44, 38.89, 16.67]
    assert len(e4["notes"]) == 2 and e3["notes"] == []


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "fig6.json"
    assert run(capsys, "figure6", "--format", "json", "--output", str(dest))[1] == ""
    assert len(json.loads(dest.read_text())) == 2


def test_simulate_experiment_3(capsys):
    code, out, _ = run(capsys, "simulate", "--experiment", "3", "--distance", "40")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 27
    for r in rows:
        if r["overlap"] == "0":
            assert r["pipeline"] == "recovered"
        if r["car_lane"] == "M":
            assert float(r["car_x"]) == 0.5


def test_simulate_single_object_middle(capsys):
    _, out, _ = run(capsys, "simulate", "--experiment", "1", "--distance", "30", "--format", "json")
    doc = json.loads(out)
    mid = [t for t in doc["trials"] if t["person"]["lane"] == "M"]
    assert mid[0]["person_box"][0] == 0.5
    assert all(t["pipeline"] == "recovered" for t in doc["trials"])


def test_simulate_bad_distance(capsys):
    assert run(capsys, "simulate", "--experiment", "3", "--distance", "20")[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "scene.cfg"
    cfg.write_text("# smaller grid\ngrid_s = 5\ngrid_c = 2\nscore_threshold = 0.3\nperson_height_ft = 6.0\n")
    code, out, _ = run(capsys, "simulate", "--experiment", "2", "--distance", "60", "--config", str(cfg), "--format", "json")
    assert code == 0
    assert json.loads(out)["grid"] == {"s": 5, "b": 2, "c": 2}


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "figure6", "--config", str(cfg))
    assert code == 2 and "unknown key" in err


def test_selfcheck_passes(capsys):
    code, out, _ = run(capsys, "selfcheck", "--seed", "0")
    assert code == 0
    assert out.count("PASS") == 3


def test_selfcheck_detects_perturbed_loss(monkeypatch):
    real = loss.yolo_loss

    def perturbed(*a, **k):
        b = real(*a, **k)
        xy = b.coord_xy * 1.01
        return loss.LossBreakdown(xy, b.coord_wh, b.conf_obj, b.conf_noobj, b.classification,
                                  xy + b.coord_wh + b.conf_obj + b.conf_noobj + b.classification)

    monkeypatch.setattr(loss, "yolo_loss", perturbed)
    buf = io.StringIO()
    assert cli.cmd_selfcheck(0, out=buf) == 1
    assert "FAIL gradient" in buf.getvalue()


def test_selfcheck_detects_broken_tie_break(monkeypatch):
    # visiting input in reverse flips which of two equal scores wins
    real = postprocess.nms
    monkeypatch.setattr(postprocess, "nms", lambda d, t: real(list(reversed(d)), t))
    buf = io.StringIO()
    assert cli.cmd_selfcheck(0, out=buf) == 1
    assert "FAIL nms" in buf.getvalue()
