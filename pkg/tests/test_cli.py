import csv
import json

import pytest

from kirillov_lab import coefficients as C
from kirillov_lab.cli import main
from kirillov_lab.suites import ConfigError, SuiteConfig, load_config, parse_complex, run_suite


def test_parse_complex():
    assert parse_complex("0.5i") == 0.5j
    assert parse_complex("i") == 1j
    assert parse_complex("1.3 - 2i") == 1.3 - 2j
    assert parse_complex("4") == 4


def test_config_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# parseval run\nsuite = kirillov-parseval\nalphas = 4  # one alpha\nP = 24\n"
                 "tol.phi = 1e-3\noutput = out.json\n", encoding="utf-8")
    cfg = load_config(p)
    assert cfg.suite == "kirillov-parseval" and cfg.reals("alphas") == [4.0]
    assert cfg.tolerances == {"phi": "1e-3"} and cfg.output == "out.json"


@pytest.mark.parametrize("text,match", [
    ("suite = moment-identity\nu = 0.9\nv = 0.9\n", "moment rule"),
    ("suite = unfolding\nxi = 1.5\n", "moment rule"),
    ("suite = kirillov-parseval\nalphas = 0.5\n", "kirillov rule"),
    ("suite = phi-construction\npoints = 0:0.01\n", "coefficients rule"),
    ("suite = hecke\ntables = lfunc\n", "selector"),
    ("suite = hecke\nbogus = 1\n", "unknown keys"),
    ("suite = nope\n", "unknown suite"),
    ("suite = casimir\ntol.casimir_order = 2\n", "unknown tolerances"),
    ("alpha = 4\n", "no suite"),
    ("suite = hecke\njunk line\n", "key = value"),
])
def test_config_rejections(tmp_path, text, match):
    p = tmp_path / "c.cfg"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match=match):
        load_config(p)


def test_run_suite_examples():
    rep = run_suite(SuiteConfig("kirillov-parseval", {"alphas": "4", "nu": "0.5i", "P": "24"}))
    assert rep.status == "pass"
    assert max(c.rel_diff for c in rep.comparisons) <= 1e-6
    rep = run_suite(SuiteConfig("moment-identity", {"tables": "tau"}))
    assert rep.status == "pass" and rep.comparisons[0].rel_diff <= 1e-4


def test_reports_byte_identical():
    cfg = SuiteConfig("geometry-roundtrip", {"count": "200"})
    assert run_suite(cfg).to_json() == run_suite(cfg).to_json()


def test_missing_dataset_inconclusive(tmp_path, capsys):
    assert main(["verify", "hecke", "--set", f"tables=maass:{tmp_path / 'absent.txt'}"]) == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "inconclusive"


def test_moment_without_maass_still_passes(tmp_path, capsys):
    sel = f"tau, maass:{tmp_path / 'absent.txt'}"
    assert main(["verify", "moment-identity", "--set", f"tables={sel}"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert any("inconclusive" in n for n in doc["notes"])


def test_verify_writes_file_and_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("KIRILLOV_LAB_OUTDIR", str(tmp_path))
    assert main(["verify", "specfun", "--out", "r/spec.json"]) == 0
    first = (tmp_path / "r" / "spec.json").read_bytes()
    assert main(["verify", "specfun", "--out", "r/spec.json"]) == 0
    assert (tmp_path / "r" / "spec.json").read_bytes() == first
    assert json.loads(first)["schema"] == 1


def test_verify_pool_orders_by_name(capsys):
    assert main(["verify", "specfun,geometry-roundtrip,hecke", "--jobs", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["suite"] for r in doc["reports"]] == ["geometry-roundtrip", "hecke", "specfun"]
    assert doc["status"] == "pass"


def test_verify_fail_exit_code(capsys):
    assert main(["verify", "hecke", "--set", "tol.hecke=1e-20", "tables=divisor:0.5i"]) == 1


def test_verify_rejects_bad_config(capsys):
    assert main(["verify", "moment-identity", "--set", "u=0.9", "v=0.9"]) == 1
    assert "moment rule" in capsys.readouterr().err


def _dataset(tmp_path, perturb=False):
    # integer divisor counts, so the Hecke relations hold exactly
    tab = C.divisor_table(0, 40)
    lam = {n: float(tab.lam[n]) for n in range(1, 41)}
    if perturb:
        lam[4] += 1e-3
    p = tmp_path / ("bad.txt" if perturb else "good.txt")
    C.write_maass_dataset(C.MaassDatasetRecord(0.5, "even", lam, 1e-14, "synthetic divisor values"), p)
    return p


def test_ingest_validated(tmp_path, capsys):
    assert main(["ingest", str(_dataset(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "validated, Hecke residual 0" in out and "automorphy residual" in out


def test_ingest_flagged(tmp_path, capsys):
    assert main(["ingest", str(_dataset(tmp_path, perturb=True))]) == 1
    assert "flagged: Hecke residual 0.001 at (m,n)=(2, 2)" in capsys.readouterr().out


def test_ingest_bundled(capsys):
    assert main(["ingest", str(C.bundled_maass_path())]) == 0
    assert "validated" in capsys.readouterr().out


@pytest.mark.parametrize("args", [
    ["ap", "nu=0.5i", "alpha=4", "p=3"],
    ["jacquet", "p=1", "nu=i", "u=0.7"],
    ["l-series", "table=tau", "s=3", "N=500"],
    ["shifted-convolution", "table=divisor:0", "m=1", "xi=3", "alpha=4", "N=500"],
    ["phi", "table=divisor:0.5i", "alpha=4", "x=0.1", "y=1", "N=500"],
])
def test_eval(args, capsys):
    assert main(["eval"] + args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == 1 and len(doc["value"]) == 2


def test_eval_errors(capsys):
    assert main(["eval", "nothing"]) == 1
    assert main(["eval", "ap", "nu=0.5i"]) == 1
    assert main(["eval", "l-series", "table=tau", "s=0.9"]) == 1


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_emit_ap_grid(tmp_path):
    assert main(["emit", "--csv", str(tmp_path / "ap.csv"), "--grid", "ap", "P=10"]) == 0
    rows = _rows(tmp_path / "ap.csv")
    assert rows[0] == ["p", "re_a_p", "im_a_p", "abs_a_p"] and len(rows) == 1 + 21
    assert [int(r[0]) for r in rows[1:]] == list(range(-10, 11))


def test_emit_empty_grid(tmp_path):
    assert main(["emit", "--csv", str(tmp_path / "e.csv"), "--grid", "moment-t", "points=0"]) == 0
    assert _rows(tmp_path / "e.csv") == [["t", "abs_L_squared", "weight", "integrand"]]


def test_emit_moment_grid(tmp_path):
    assert main(["emit", "--csv", str(tmp_path / "m.csv"), "--grid", "moment-t", "points=11", "N=200"]) == 0
    rows = _rows(tmp_path / "m.csv")
    assert len(rows) == 12
    vals = [float(r[3]) for r in rows[1:]]
    assert all(v >= 0 for v in vals) and max(vals) == vals[5]


def test_emit_report_legs(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["verify", "kirillov-parseval", "--set", "alphas=4", "--out", str(rep)]) == 0
    assert main(["emit", "--csv", str(tmp_path / "r.csv"), "--grid", "report", f"report={rep}"]) == 0
    rows = _rows(tmp_path / "r.csv")
    assert rows[0][:2] == ["suite", "leg"] and len(rows) == 3


def test_emit_missing_report(tmp_path, capsys):
    assert main(["emit", "--csv", str(tmp_path / "r.csv"), "--grid", "report", f"report={tmp_path}/none.json"]) == 1
