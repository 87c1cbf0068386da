import csv
import io
import json
import math

import pytest

from rangepolymer import cli
from rangepolymer.validation import CheckResult


def invoke(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), stdout=buf)
    return code, buf.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_ruin_columns():
    code, out = invoke("ruin", "--z", "7", "--T", "15", "--n", "10000")
    assert code == 0
    table = rows(out)
    assert {"exact", "asymptotic", "rel_err"} <= set(table[0])
    assert [r["quantity"] for r in table] == ["exit_bottom", "exit_top", "confinement"]
    conf = table[2]
    assert float(conf["rel_err"]) < 1e-12
    # 17 significant digits
    assert len(conf["exact"].split("e")[0].replace(".", "").lstrip("0")) == 17


def test_partition_two_steps():
    code, out = invoke("partition", "--n", "2", "--h", "1", "--exact")
    assert code == 0
    (row,) = rows(out)
    assert float(row["log_value"]) == pytest.approx(math.log(0.5 * math.exp(-2) + 0.5 * math.exp(-3)), rel=4 * 2.0**-52)


def test_partition_asymptotic_rows():
    code, out = invoke("partition", "--n", "100000", "--gamma=-0.3")
    assert code == 0
    variants = [r["variant"] for r in rows(out)]
    assert variants[0] == "exact" and "weak" in variants and "strong" not in variants
    code, out = invoke("partition", "--n", "100000", "--gamma", "0.4", "--asymptotic-only")
    assert [r["variant"] for r in rows(out)] == ["strong", "strong_derived"]


def test_partition_undeclared_regime_lists_all_variants():
    code, out = invoke("partition", "--n", "10", "--h", "0.5")
    assert code == 0
    assert [r["variant"] for r in rows(out)] == ["exact", "weak", "critical", "strong", "strong_derived"]
    assert all(r["regime"] == "" for r in rows(out))


def test_range_prob_example():
    code, out = invoke("range-prob", "--x", "1", "--y", "1", "--n", "3")
    assert code == 0
    exact = next(r for r in rows(out) if r["variant"] == "exact")
    assert float(exact["value"]) == 0.25


def test_law_tables_normalized():
    for table in ("t", "w"):
        code, out = invoke("law", "--n", "200", "--h", "0.3", "--regime", "weak", "--table", table)
        assert code == 0
        assert sum(float(r["probability"]) for r in rows(out)) == pytest.approx(1.0, abs=1e-10)
    code, out = invoke("law", "--n", "3", "--h", "1", "--table", "conditional", "--t", "2")
    assert code == 0
    assert [float(r["probability"]) for r in rows(out)] == [0.25, 0.5, 0.25]


def test_limits_gamma_sweep():
    code, out = invoke("limits", "--n", "3000", "--gammas=-0.3,0.25,0.4")
    assert code == 0
    assert len(rows(out)) == 3


def test_validate_oracle_suite():
    code, out = invoke("validate", "--suite", "oracle")
    assert code == 0
    assert all(r["passed"] == "true" for r in rows(out))


def test_validation_failure_exit_code(monkeypatch):
    bad = CheckResult("x", "always fails", False, "forced", {}, 0.0)
    monkeypatch.setattr(cli, "run_suite", lambda name: [bad])
    code, out = invoke("validate", "--suite", "oracle")
    assert code == 2
    assert rows(out)[0]["passed"] == "false"


@pytest.mark.parametrize(
    "argv",
    [
        ["ruin", "--z", "7"],
        ["ruin", "--z", "0", "--T", "5", "--n", "3", "--side", "bottom"],
        ["nonsense"],
        ["partition", "--n", "10", "--h", "0.5", "--gamma", "0.2", "--regime", "weak"],
        ["sample", "path", "--x", "1", "--y", "1", "--n", "2"],
        ["range-prob", "--x", "-1", "--y", "1", "--n", "3"],
    ],
)
def test_usage_errors(argv):
    assert invoke(*argv)[0] == 1


def test_resource_error_exit_code():
    code, _ = invoke("sample", "path", "--x", "1000", "--y", "1000", "--n", "30000")
    assert code == 3


def test_sample_is_reproducible_across_workers():
    a = invoke("sample", "range", "--n", "300", "--h", "0.2", "--regime", "weak", "--count", "70000", "--seed", "9",
               "--workers", "1")
    b = invoke("sample", "range", "--n", "300", "--h", "0.2", "--regime", "weak", "--count", "70000", "--seed", "9",
               "--workers", "3")
    assert a == b and a[0] == 0


def test_sample_paths_have_requested_range():
    code, out = invoke("sample", "path", "--x", "2", "--y", "3", "--n", "12", "--count", "20", "--seed", "4")
    assert code == 0
    for r in rows(out):
        pos = [0]
        for c in r["steps"]:
            pos.append(pos[-1] + (1 if c == "+" else -1))
        assert (-min(pos), max(pos)) == (2, 3)


def test_config_precedence_and_sidecar(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 2, "T": 6, "n": 40, "side": "top"}))
    out = tmp_path / "out.csv"
    monkeypatch.setenv("RANGEPOLYMER_WORKERS", "2")
    code, text = invoke("ruin", "--config", str(cfg), "--n", "41", "--out", str(out))
    assert code == 0 and text == ""
    (row,) = rows(out.read_text())
    assert (row["quantity"], row["n"], row["T"]) == ("exit_top", "41", "6")
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert meta["command"] == "ruin"
    assert meta["settings"]["n"] == 41 and meta["settings"]["workers"] == 2


def test_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert invoke("ruin", "--config", str(bad))[0] == 1
    assert invoke("ruin", "--config", str(tmp_path / "missing.json"))[0] == 1
