import io

import pytest

from groupdp.cli import main
from groupdp.sweep import (
    SweepSpec,
    parse_sweep_spec,
    run_sweep,
    run_sweep_point,
    write_sweep_csv,
)

SMALL_SPEC = """
# quick spec used across tests
mechanism = laplace
sweep = m
values = 2, 3
alpha = 4
tau = 1
q = 0.1
T = 5
delta = 1e-5
accountants = ours, baseline
"""


class TestSpecParsing:
    def test_round_trips_fields(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        assert spec.mechanism == "laplace"
        assert spec.swept == "m"
        assert spec.values == (2, 3)
        assert spec.accountants == ("ours", "baseline")
        assert spec.iterations == 5 and spec.q == 0.1 and spec.alpha == 4.0

    def test_lower_is_an_alias(self):
        spec = parse_sweep_spec(SMALL_SPEC.replace("ours, baseline", "lower"))
        assert spec.accountants == ("lower_bound",)

    @pytest.mark.parametrize(
        "mutation",
        [
            ("values = 2, 3", "values = 3, 2"),  # not increasing
            ("values = 2, 3", "values = 2, 2"),  # not strict
            ("accountants = ours, baseline", "accountants = ours, pld"),
            ("sweep = m", "sweep = sigma"),
            ("alpha = 4", ""),  # tau target without alpha
            ("q = 0.1", ""),  # missing fixed variable
            ("tau = 1", "tau = 1\nepsilon = 4"),  # two targets
            ("mechanism = laplace", "mechanism = laplace\nm = 8"),  # swept and fixed
        ],
    )
    def test_rejects_bad_specs(self, mutation):
        old, new = mutation
        with pytest.raises(ValueError):
            parse_sweep_spec(SMALL_SPEC.replace(old, new))

    def test_rejects_empty_accountants(self):
        with pytest.raises(ValueError):
            parse_sweep_spec(SMALL_SPEC.replace("ours, baseline", ""))

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            parse_sweep_spec(SMALL_SPEC + "\nworkers = 3\n")

    def test_rejects_garbage_lines(self):
        with pytest.raises(ValueError):
            parse_sweep_spec(SMALL_SPEC + "\nnot a key value line\n")


class TestRunSweep:
    def test_row_order_and_rounding(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        rows = run_sweep(spec)
        assert [(r.swept_value, r.accountant) for r in rows] == [
            (2, "ours"), (2, "baseline"), (3, "ours"), (3, "baseline"),
        ]
        by_key = {(r.swept_value, r.accountant): r for r in rows}
        assert by_key[(3, "baseline")].effective_m == 4  # rounded up to a power of two
        assert by_key[(3, "ours")].effective_m == 3
        for row in rows:
            assert row.tau <= 1.0 + 1e-9
            assert row.epsilon is not None and row.delta == 1e-5

    def test_requested_order_is_canonical(self):
        spec = parse_sweep_spec(SMALL_SPEC.replace("ours, baseline", "baseline, ours"))
        rows = run_sweep(spec)
        assert [r.accountant for r in rows[:2]] == ["ours", "baseline"]

    def test_epsilon_sweep(self):
        text = """
        mechanism = rr
        sweep = epsilon
        values = 2, 4
        delta = 1e-5
        q = 0.1
        T = 5
        m = 4
        accountants = ours
        """
        rows = run_sweep(parse_sweep_spec(text))
        assert len(rows) == 2
        assert rows[0].epsilon <= 2.0 and rows[1].epsilon <= 4.0
        assert rows[0].noise_param <= rows[1].noise_param  # tighter target, smaller p

    def test_workers_preserve_order(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        assert run_sweep(spec, workers=2) == run_sweep(spec, workers=1)

    def test_single_point_matches_batch(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        assert run_sweep_point(spec, 2, "ours") == run_sweep(spec)[0]


class TestCsvOutput:
    def test_byte_identical_rewrites(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        rows = run_sweep(spec)
        first, second = io.StringIO(), io.StringIO()
        write_sweep_csv(spec, rows, first)
        write_sweep_csv(spec, run_sweep(spec), second)
        assert first.getvalue() == second.getvalue()

    def test_structure(self):
        spec = parse_sweep_spec(SMALL_SPEC)
        out = io.StringIO()
        write_sweep_csv(spec, run_sweep(spec), out)
        lines = out.getvalue().splitlines()
        header = [line for line in lines if line.startswith("#")]
        data = [line for line in lines if not line.startswith("#")]
        assert any("mechanism = laplace" in line for line in header)
        assert data[0] == (
            "swept_name,swept_value,effective_m,accountant,noise_param,"
            "alpha_used,tau,epsilon,delta"
        )
        assert len(data) == 1 + 4
        assert all(len(line.split(",")) == 9 for line in data)


class TestCliCommands:
    def test_account_best_alpha(self, capsys):
        code = main(["account", "--mech", "gaussian", "--sigma", "4", "--q", "0.05",
                     "--T", "500", "--m", "8", "--delta", "1e-5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "chosen alpha" in out and "gp: m=8" in out

    def test_account_fixed_alpha_value(self, capsys):
        code = main(["account", "--mech", "rr", "--p", "0.75", "--q", "0.5",
                     "--T", "1", "--m", "1", "--alpha", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "tau=0.5108256238" in out

    def test_account_huge_noise_hits_conversion_floor(self, capsys):
        code = main(["account", "--mech", "gaussian", "--sigma", "1e9", "--q", "0.05",
                     "--T", "1", "--m", "2", "--delta", "1e-5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "epsilon=0.05972" in out

    def test_calibrate_round_trip(self, capsys):
        code = main(["calibrate", "--mech", "gaussian", "--target-eps", "4",
                     "--delta", "1e-5", "--m", "32", "--q", "0.05", "--T", "500",
                     "--accountant", "ours"])
        out = capsys.readouterr().out
        assert code == 0
        assert "calibrated sigma" in out and "verification (ours)" in out

    def test_calibrate_infeasible_exit_code(self, capsys):
        code = main(["calibrate", "--mech", "rr", "--target-eps", "0.01",
                     "--delta", "1e-5", "--m", "4", "--q", "0.05", "--T", "1"])
        err = capsys.readouterr().err
        assert code == 3
        assert "achievable" in err

    def test_compare_reports_three_ways(self, capsys):
        code = main(["compare", "--mech", "skellam", "--mu", "25", "--q", "0.1",
                     "--T", "1", "--m", "3", "--alpha", "4", "--delta", "1e-5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "ours" in out and "baseline" in out and "lower_bound" in out
        assert "effective_m=4" in out  # m=3 rounds up for the baseline row

    def test_usage_errors_exit_two(self, capsys):
        # wrong noise flag for the family
        code = main(["account", "--mech", "gaussian", "--b", "2", "--q", "0.05",
                     "--T", "1", "--m", "2", "--alpha", "2"])
        assert code == 2
        # q at the boundary is rejected
        code = main(["account", "--mech", "rr", "--p", "0.75", "--q", "1",
                     "--T", "1", "--m", "2", "--alpha", "2"])
        assert code == 2
        # no order selection at all
        code = main(["account", "--mech", "gaussian", "--sigma", "2", "--q", "0.05",
                     "--T", "1", "--m", "2"])
        assert code == 2
        capsys.readouterr()

    def test_argparse_usage_exits_two(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["account", "--mech", "cauchy", "--q", "0.1", "--m", "2"])
        assert exc_info.value.code == 2

    def test_sweep_writes_csv(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.txt"
        spec_path.write_text(SMALL_SPEC)
        out_path = tmp_path / "rows.csv"
        code = main(["sweep", "--spec", str(spec_path), "--out", str(out_path)])
        assert code == 0
        assert out_path.exists()
        first = out_path.read_bytes()
        assert main(["sweep", "--spec", str(spec_path), "--out", str(out_path)]) == 0
        assert out_path.read_bytes() == first
        capsys.readouterr()

    def test_sweep_unwritable_output_exits_four(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.txt"
        spec_path.write_text(SMALL_SPEC)
        code = main(["sweep", "--spec", str(spec_path),
                     "--out", str(tmp_path / "missing" / "rows.csv")])
        assert code == 4
        capsys.readouterr()

    def test_sweep_without_output_path_exits_two(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.txt"
        spec_path.write_text(SMALL_SPEC)
        assert main(["sweep", "--spec", str(spec_path)]) == 2
        capsys.readouterr()
