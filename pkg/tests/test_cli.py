import json

import pytest

from vecint import VectorArray
from vecint.cli import EXIT_BUDGET, EXIT_EMPTY, EXIT_OK, EXIT_USAGE, main
from vecint.io import array_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


class TestExitCodes:
    def test_ok(self, capsys):
        code, d = run_json(capsys, "count", "--array", "kalai:4", "--target", "2,5")
        assert code == EXIT_OK and d["count"] == "2"

    def test_usage(self, capsys):
        assert run(capsys)[0] == EXIT_USAGE
        assert run(capsys, "count", "--array", "kalai:4")[0] == EXIT_USAGE
        assert run(capsys, "count", "--array", "nonsense:4", "--target", "1,1")[0] == EXIT_USAGE
        assert run(capsys, "classify", "--g", "0.5,0.5")[0] == EXIT_USAGE

    def test_infeasible(self, capsys):
        code, d = run_json(capsys, "maxent", "--array", "kalai:4", "--target", "5,10")
        assert code == EXIT_EMPTY and d["status"] == "infeasible"

    def test_empty_histogram(self, capsys):
        assert run(capsys, "popular", "--array", "kalai:4", "--z", "0,0")[0] == EXIT_EMPTY

    def test_budget(self, capsys):
        code, _ = run(capsys, "count", "--array", "kalai:30", "--target", "15,200", "--state-budget", "10")
        assert code == EXIT_BUDGET
        code, _ = run(capsys, "--state-budget", "10", "count", "--array", "kalai:30", "--target", "15,200")
        assert code == EXIT_BUDGET


class TestOutputs:
    def test_count_csv(self, capsys):
        code, out = run(capsys, "count", "--array", "kalai:6", "--target", "3,10", "--format", "csv")
        assert code == 0 and out.splitlines()[0] == "count,log2_count"

    def test_marginals_are_exact(self, capsys):
        _, d = run_json(capsys, "count", "--array", "kalai:4", "--target", "2,5", "--marginals")
        assert d["marginals"][0] == ["1/2", "1/2"]

    def test_paircount_csv(self, capsys):
        code, out = run(capsys, "paircount", "--array", "kalai:8", "--z", "4,18", "--format", "csv")
        lines = out.splitlines()
        assert lines[0] == "t,w,count"
        _, d = run_json(capsys, "paircount", "--array", "kalai:8", "--z", "4,18")
        m = int(d["fibre_size"])
        assert sum(int(x.split(",")[2]) for x in lines[1:]) == m * (m - 1) == int(d["total"])

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "res.json"
        code, out = run(capsys, "beta-star", "--alpha", "0.5,0.4375", "--out", str(path))
        assert code == 0 and out == ""
        d = json.loads(path.read_text())
        assert d["beta_star"] == pytest.approx([0.26172, 0.19922], abs=1e-5)

    def test_inline_array_json(self, capsys):
        arr = json.dumps(array_to_json(VectorArray.constant(5)))
        _, d = run_json(capsys, "count", "--array", arr, "--target", "2")
        assert d["count"] == "10"
        bad = json.dumps({**array_to_json(VectorArray.constant(2)), "extra": 1})
        assert run(capsys, "count", "--array", bad, "--target", "1")[0] == EXIT_USAGE

    def test_classify(self, capsys):
        _, d = run_json(capsys, "classify", "--g", "0.5,0.5,0.2,0.2")
        assert d["verdict"] == "kalai" and d["families"] == ["Gamma2", "Gamma3"]

    def test_popular(self, capsys):
        _, d = run_json(capsys, "popular", "--array", "kalai:10", "--z", "5,27")
        assert d["target"] == [3, 16] and len(d["beta_star_prediction"]) == 2

    def test_ldp_scan(self, capsys):
        _, d = run_json(capsys, "ldp-scan", "--n-list", "10,12", "--threads", "2")
        assert [r["n"] for r in d["rows"]] == [10, 12]
        assert all(r["deviation"] >= 0 for r in d["rows"])

    def test_hmax(self, capsys):
        _, d = run_json(capsys, "hmax", "--array", "kalai:6", "--z", "3,10", "--w", "1,3")
        assert d["status"] == "optimal" and d["h_max_bits"] <= 2 * d["entropy_p_bits"] + 1e-9

    def test_check_and_vcdim(self, capsys):
        _, d = run_json(capsys, "check", "--array", "kalai:12", "--generating", "0.1,7", "--generic", "0.2,0.3")
        assert d["generating"]["passed"] and d["generic"]["passed"]
        _, d = run_json(capsys, "vcdim", "--pairs", "9")
        assert d["vc"] == 0 and d["family_size"] == 1680

    def test_probabilistic_commands_are_seeded(self, capsys):
        args = ("chernoff", "--array", "kalai:20", "--t-grid", "2,5", "--trials", "2000", "--seed", "4")
        assert run(capsys, *args)[1] == run(capsys, *args)[1]
        _, d = run_json(capsys, "drc", "--n1", "100", "--n2", "100", "--t", "3")
        assert d["verified"]
        _, d = run_json(capsys, "correlation", "--n", "6", "--instances", "30")
        assert d["violations"] == 0

    def test_contiguity(self, capsys):
        _, d = run_json(capsys, "contiguity", "--array", "kalai:10", "--target", "5,27", "--eps-grid", "0.01,0.1")
        assert d["fibre_size"] == 20 and len(d["rows"]) == 2

    def test_counterexamples(self, capsys):
        _, d = run_json(capsys, "verify-ce1")
        assert d["verdict"] == "vacuous"
        _, d = run_json(capsys, "verify-ce2")
        assert d["verdict"] == "verified" and d["pairs_in_family"] == 0

    def test_patterns(self, capsys):
        _, d = run_json(capsys, "patterns", "--l", "2,1", "--k", "2,1", "--M", "1,1;1,0", "--cross-check")
        assert d == {"count": "6", "cross_checked": True}

    def test_strict_json(self, capsys):
        _, out = run(capsys, "contiguity", "--array", "kalai:8", "--target", "4,18")
        # infinities are encoded as strings so the output is strict JSON
        json.loads(out, parse_constant=lambda c: pytest.fail(f"non-strict constant {c}"))
