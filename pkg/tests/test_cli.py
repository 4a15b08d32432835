import csv
import io
import json
import subprocess
import sys

import pytest

from prodlab.cli import run
from prodlab.numerics import PREC_ENV_VAR


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def fields(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


class TestPi:
    def test_viete_30_terms(self):
        code, out, _ = call("pi", "--family", "viete", "--terms", "30", "--prec-bits", "128")
        assert code == 0
        f = fields(out)
        assert f["partial"].startswith("0.63661977236758134")
        assert f["limit"].startswith("0.636619772367581343075535053490057448")
        assert float(f["abs_error"]) < 1e-17

    def test_target_err(self):
        code, out, _ = call("pi", "--family", "viete", "--target-err", "1e-17")
        assert code == 0 and fields(out)["terms"] == "29"

    def test_tan_estimates_pi(self):
        code, out, _ = call("pi", "--family", "tan", "--q", "3", "--terms", "40")
        assert code == 0 and fields(out)["pi_estimate"].startswith("3.14159265358979323846264338327950288")

    def test_needs_terms_or_target(self):
        code, _, err = call("pi", "--family", "sinc")
        assert code == 2 and err.startswith("prodlab: error:")


class TestEval:
    def test_tan(self):
        code, out, _ = call("eval", "--family", "tan", "--q", "2", "--z", "1", "--m", "0", "--n", "1")
        assert code == 0
        f = fields(out)
        assert f["partial"].startswith("1.06974696366227456115666388410247496")
        assert float(f["rel_diff_partial_closed"]) < 1e-35

    def test_tan_exp_logs(self):
        code, out, _ = call("eval", "--family", "tanexp", "--q", "3", "--z", "pi/4", "--m", "1", "--n", "4")
        f = fields(out)
        assert code == 0 and "log_partial" in f and "log_closed_form" in f
        assert float(f["rel_diff_partial_closed"]) < 1e-30

    @pytest.mark.parametrize(
        "argv,needle",
        [
            (["--family", "tan", "--q", "1", "--z", "1", "--m", "0", "--n", "2"], "q must be an integer >= 2"),
            (["--family", "tan", "--q", "2", "--z", "4", "--m", "0", "--n", "2"], "pi"),
            (["--family", "sinc", "--q", "2", "--z", "1", "--m", "2", "--n", "2"], "m < n"),
            (["--family", "sinc", "--q", "2", "--z", "pie", "--m", "0", "--n", "2"], "pie"),
            (["--family", "nope", "--q", "2", "--z", "1", "--m", "0", "--n", "2"], "nope"),
        ],
    )
    def test_usage_errors(self, argv, needle):
        code, out, err = call("eval", *argv)
        assert code == 2 and out == ""
        assert len(err.strip().splitlines()) == 1 and needle in err

    def test_unknown_flag(self):
        code, _, err = call("verify", "--bogus")
        assert code == 2 and "--bogus" in err


class TestTable1:
    def test_n3_text(self):
        code, out, _ = call("table1", "--n", "3", "--terms", "5")
        assert code == 0
        last = out.strip().splitlines()[-1]
        assert last.startswith("k=result  expression=6 * sqrt(1/3)")
        assert "value=3.4641016151377545870548926830117447" in last
        assert "2 * sqrt(3) (equal_within)" in out

    def test_csv_round_trips_text(self):
        _, text, _ = call("table1", "--n", "5", "--terms", "4")
        _, data, _ = call("table1", "--n", "5", "--terms", "4", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(data)))
        assert len(rows) == 5
        text_rows = [line for line in text.splitlines() if line.startswith("k=")]
        for row, line in zip(rows, text_rows):
            assert line == "  ".join(f"{k}={v}" for k, v in row.items())

    def test_json(self):
        _, a, _ = call("table1", "--n", "8", "--terms", "3", "--format", "json")
        _, b, _ = call("table1", "--n", "8", "--terms", "3", "--format", "json")
        assert a == b
        doc = json.loads(a)
        assert list(doc) == ["n", "z", "limit", "reference_coefficient", "rows"]
        assert all(isinstance(v, str) for row in doc["rows"] for v in row.values())

    def test_unsupported_n(self):
        assert call("table1", "--n", "7", "--terms", "3")[0] == 2


class TestRadicals:
    def test_rows(self):
        code, out, _ = call("radicals", "--viete-terms", "3", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["factor"] for r in rows] == ["sqrt(1/2)", "sqrt((sqrt(1/2) + 1)/2)", "sqrt((sqrt((sqrt(1/2) + 1)/2) + 1)/2)"]
        assert rows[2]["product"].startswith("0.64072886193537654469902157404442497")

    def test_bad_count(self):
        assert call("radicals", "--viete-terms", "0")[0] == 2


class TestConverge:
    def test_csv(self, tmp_path):
        path = tmp_path / "c.csv"
        code, out, _ = call("converge", "--family", "sinc", "--q", "2", "--z", "1", "--max-terms", "20", "--out", str(path))
        assert code == 0
        order = float(fields(out)["fitted_order"])
        assert abs(order + 1.3862943611198906) < 0.05 * 1.3862943611198906
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["terms", "abs_error", "log2_abs_error"]
        assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, 21)]

    def test_degenerate(self, tmp_path):
        code, _, err = call("converge", "--family", "sinc", "--q", "2", "--z", "0", "--max-terms", "20", "--out", str(tmp_path / "c.csv"))
        assert code == 2 and "precision" in err


class TestVerify:
    def test_seed_7(self):
        code, out, err = call("verify", "--seed", "7", "--cases", "10")
        assert code == 0 and "failures: 0" in out
        assert "wall_time" in err and "wall_time" not in out

    def test_zero_cases(self):
        assert call("verify", "--cases", "0")[0] == 2


def test_digit_count():
    for bits, digits in [(128, 36), (200, 58), (64, 17)]:
        _, out, _ = call("pi", "--family", "viete", "--terms", "5", "--prec-bits", str(bits))
        assert len(fields(out)["partial"].split(".")[1]) == digits


def test_env_precision(monkeypatch):
    monkeypatch.setenv(PREC_ENV_VAR, "64")
    _, out, _ = call("pi", "--family", "viete", "--terms", "5")
    assert len(fields(out)["partial"].split(".")[1]) == 17
    _, out, _ = call("pi", "--family", "viete", "--terms", "5", "--prec-bits", "128")
    assert len(fields(out)["partial"].split(".")[1]) == 36


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "prodlab", "pi", "--family", "sinc", "--terms", "10"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "pi_estimate" in proc.stdout
