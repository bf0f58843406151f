import json
import math

import pytest

from cavity_entangler import ArgumentError, kappa_from_quality
from cavity_entangler.cli import (
    CSV_HEADER,
    config_from_dict,
    main,
    parse_frequency,
    three_level_transfer_fidelity,
)


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestFrequencyParsing:
    def test_plain_number_is_angular(self):
        assert parse_frequency(2.5e4) == 2.5e4

    def test_hz_family_converted(self):
        assert parse_frequency("10 MHz") == pytest.approx(2 * math.pi * 1e7)
        assert parse_frequency("1.5 GHz") == pytest.approx(2 * math.pi * 1.5e9)
        assert parse_frequency("3 kHz") == pytest.approx(2 * math.pi * 3e3)
        assert parse_frequency("2e4 rad/s") == pytest.approx(2e4)

    def test_garbage_rejected(self):
        with pytest.raises(ArgumentError):
            parse_frequency("fast")
        with pytest.raises(ArgumentError):
            parse_frequency("10 parsecs")


class TestConfigParsing:
    def test_kappa_and_quality_are_exclusive(self):
        with pytest.raises(ArgumentError):
            config_from_dict(
                {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.0,
                 "Q": 1e7, "nu_c": 4e10}
            )
        with pytest.raises(ArgumentError):
            config_from_dict({"protocol": "cluster", "N": 2, "lambdas": 1.0})

    def test_quality_pair_resolves_kappa(self):
        cfg = config_from_dict(
            {"protocol": "cluster", "N": 2, "lambdas": 1.0, "Q": 1e7, "nu_c": "40 GHz"}
        )
        assert cfg.kappa == pytest.approx(kappa_from_quality(1e7, 4e10))

    def test_coupling_triple(self):
        cfg = config_from_dict(
            {"protocol": "cluster", "N": 2, "kappa": 0.0,
             "lambdas": {"g": 1.8e8, "omega": 8.5e7, "delta": 1.5e9}}
        )
        assert cfg.lambdas == (pytest.approx(1.02e7),) * 2

    def test_wstate_lambdas_are_rest_couplings(self):
        cfg = config_from_dict(
            {"protocol": "wstate", "N": 4, "lambdas": [1.0, 1.0, 2.0], "kappa": 0.0}
        )
        assert len(cfg.lambdas) == 3

    def test_bad_protocol(self):
        with pytest.raises(ArgumentError):
            config_from_dict({"protocol": "ghz", "N": 2, "lambdas": 1.0, "kappa": 0})


class TestRunCommand:
    def test_ideal_cluster_run_output(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"protocol": "cluster", "N": 4, "lambdas": 1.0, "kappa": 0.0}
        )
        code = main(["run", "--config", cfg])
        out = capsys.readouterr().out
        assert code == 0
        assert "F=1.000000000000" in out
        assert "P=1.000000000000" in out
        assert "protocol=cluster" in out

    def test_regime_violation_exits_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.5}
        )
        code = main(["run", "--config", cfg])
        err = capsys.readouterr().err
        assert code == 2
        assert "0.1" in err

    def test_missing_config_exits_1(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "absent.json")])
        assert code == 1

    def test_protocol_failure_exits_3(self, tmp_path, capsys, monkeypatch):
        from cavity_entangler import ProtocolError
        import cavity_entangler.cli as cli_module

        def boom(config, n, kappa):
            raise ProtocolError("induced failure", residual=1.0)

        monkeypatch.setattr(cli_module, "_execute", boom)
        cfg = write_config(
            tmp_path, {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.0}
        )
        code = main(["run", "--config", cfg])
        assert code == 3
        assert "induced failure" in capsys.readouterr().err

    def test_wstate_feasibility_numbers(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "protocol": "wstate",
                "N": 4,
                "lambdas": {"g": 1.8e8, "omega": 8.5e7, "delta": 1.5e9},
                "Q": 1e7,
                "nu_c": "40 GHz",
            },
        )
        code = main(["run", "--config", cfg])
        out = capsys.readouterr().out
        assert code == 0
        values = dict(line.split("=", 1) for line in out.strip().splitlines())
        assert float(values["kappa_over_lambda"]) == pytest.approx(2.464e-3, rel=1e-3)
        kappa = kappa_from_quality(1e7, 4e10)
        t = float(values["duration"])
        assert float(values["P"]) == pytest.approx(math.exp(-kappa * t / 4), abs=1e-10)
        assert t == pytest.approx(1.26e-7, rel=0.02)

    def test_dump_state_format(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.0}
        )
        dump = tmp_path / "state.txt"
        code = main(["run", "--config", cfg, "--dump-state", str(dump)])
        assert code == 0
        lines = dump.read_text().strip().splitlines()
        assert len(lines) == 4
        bits, photon, re_part, im_part = lines[0].split()
        assert bits == "00" and photon == "0"
        assert float(re_part) == pytest.approx(0.5)
        # all amplitudes real +-0.5 for the two-qubit cluster
        mags = sorted(abs(float(l.split()[2])) for l in lines)
        assert mags == pytest.approx([0.5] * 4)

    def test_dump_hamiltonian(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.1}
        )
        dump = tmp_path / "h.txt"
        code = main(["run", "--config", cfg, "--dump-h", str(dump)])
        assert code == 0
        text = dump.read_text()
        assert text.startswith("# step 1")
        rows = [l for l in text.splitlines() if not l.startswith("#")]
        assert all(len(r.split()) == 4 for r in rows)

    def test_raw_fidelity_convention(self, tmp_path, capsys):
        doc = {"protocol": "cluster", "N": 2, "lambdas": 1.0, "kappa": 0.04}
        cfg = write_config(tmp_path, doc)
        main(["run", "--config", cfg])
        normalized = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        main(["run", "--config", cfg, "--fidelity-convention", "raw"])
        raw = dict(line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines())
        assert float(raw["F"]) == pytest.approx(
            float(normalized["F"]) * float(normalized["P"]), abs=1e-9
        )


class TestSweepCommand:
    def test_grid_rows_and_monotonicity(self, tmp_path, capsys):
        out_csv = tmp_path / "sweep.csv"
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 4,
                "lambdas": 1.0,
                "kappa": 0.0,
                "mode": "analytic",
                "sweep": {
                    "kappa_over_lambda": {"start": 0.0, "stop": 0.1, "steps": 6},
                    "N_list": [2, 3, 4],
                },
                "output": str(out_csv),
            },
        )
        code = main(["sweep", "--config", cfg])
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == CSV_HEADER
        rows = [l.split(",") for l in lines[1:]]
        assert len(rows) == 18
        assert all(r[6] == "ok" for r in rows)
        by_n = {}
        for r in rows:
            by_n.setdefault(int(r[1]), []).append((float(r[2]), float(r[3]), float(r[4])))
        for n, pts in by_n.items():
            fs = [f for _, f, _ in pts]
            ps = [p for _, _, p in pts]
            assert fs == sorted(fs, reverse=True)
            assert ps == sorted(ps, reverse=True)

    def test_wstate_success_probability_column(self, tmp_path, capsys):
        out_csv = tmp_path / "w.csv"
        cfg = write_config(
            tmp_path,
            {
                "protocol": "wstate",
                "N": 4,
                "lambdas": 1.0,
                "kappa": 0.0,
                "sweep": {
                    "kappa_over_lambda": {"start": 0.0, "stop": 0.1, "steps": 6},
                    "N_list": [4],
                },
                "output": str(out_csv),
            },
        )
        from cavity_entangler import w_solve_lambda1
        code = main(["sweep", "--config", cfg])
        assert code == 0
        rows = [l.split(",") for l in out_csv.read_text().strip().splitlines()[1:]]
        for r in rows:
            ratio, p = float(r[2]), float(r[4])
            sol = w_solve_lambda1((1.0, 1.0, 1.0), ratio)
            assert p == pytest.approx(math.exp(-ratio * sol.duration / 4), abs=1e-10)

    def test_deterministic_output_modulo_runtime(self, tmp_path, capsys):
        doc = {
            "protocol": "cluster",
            "N": 3,
            "lambdas": 1.0,
            "kappa": 0.0,
            "sweep": {
                "kappa_over_lambda": {"start": 0.0, "stop": 0.08, "steps": 4},
                "N_list": [2, 3],
            },
        }
        cfg = write_config(tmp_path, doc)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", "--config", cfg, "--output", str(a)]) == 0
        assert main(["sweep", "--config", cfg, "--output", str(b)]) == 0

        def mask_runtime(path):
            rows = path.read_text().strip().splitlines()
            return [",".join(r.split(",")[:5] + r.split(",")[6:]) for r in rows]

        assert mask_runtime(a) == mask_runtime(b)

    def test_parallel_jobs_match_serial(self, tmp_path, capsys):
        doc = {
            "protocol": "cluster",
            "N": 2,
            "lambdas": 1.0,
            "kappa": 0.0,
            "sweep": {
                "kappa_over_lambda": {"start": 0.0, "stop": 0.1, "steps": 3},
                "N_list": [2],
            },
        }
        cfg = write_config(tmp_path, doc)
        a, b = tmp_path / "serial.csv", tmp_path / "par.csv"
        assert main(["sweep", "--config", cfg, "--output", str(a)]) == 0
        assert main(["sweep", "--config", cfg, "--output", str(b), "--jobs", "2"]) == 0

        def mask_runtime(path):
            rows = path.read_text().strip().splitlines()
            return [",".join(r.split(",")[:5] + r.split(",")[6:]) for r in rows]

        assert mask_runtime(a) == mask_runtime(b)

    def test_out_of_regime_points_recorded_not_fatal(self, tmp_path, capsys):
        out_csv = tmp_path / "far.csv"
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 2,
                "lambdas": 1.0,
                "kappa": 0.0,
                "sweep": {
                    "kappa_over_lambda": {"start": 0.05, "stop": 0.2, "steps": 4},
                    "N_list": [2],
                },
                "output": str(out_csv),
            },
        )
        code = main(["sweep", "--config", cfg])
        assert code == 0
        rows = [l.split(",") for l in out_csv.read_text().strip().splitlines()[1:]]
        statuses = [r[6] for r in rows]
        assert statuses.count("regime_error") == 2
        assert statuses.count("ok") == 2

    def test_gnuplot_companion_script(self, tmp_path, capsys):
        out_csv = tmp_path / "plot.csv"
        script = tmp_path / "plot.gp"
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 2,
                "lambdas": 1.0,
                "kappa": 0.0,
                "sweep": {
                    "kappa_over_lambda": {"start": 0.0, "stop": 0.1, "steps": 3},
                    "N_list": [2, 3],
                },
                "output": str(out_csv),
            },
        )
        code = main(["sweep", "--config", cfg, "--gnuplot", str(script)])
        assert code == 0
        text = script.read_text()
        assert str(out_csv) in text
        assert '"F, N=2"' in text and '"P, N=3"' in text

    def test_empty_grid_exits_1(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 2,
                "lambdas": 1.0,
                "kappa": 0.0,
                "sweep": {"kappa_over_lambda": {"start": 0, "stop": 0.1, "steps": 0}},
            },
        )
        assert main(["sweep", "--config", cfg]) == 1

    def test_large_register_uses_recursion(self, tmp_path, capsys):
        out_csv = tmp_path / "big.csv"
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 32,
                "lambdas": 1.0,
                "kappa": 0.0,
                "sweep": {
                    "kappa_over_lambda": {"start": 0.02, "stop": 0.1, "steps": 3},
                    "N_list": [32, 64],
                },
                "output": str(out_csv),
            },
        )
        code = main(["sweep", "--config", cfg])
        assert code == 0
        rows = [l.split(",") for l in out_csv.read_text().strip().splitlines()[1:]]
        assert len(rows) == 6
        assert all(r[6] == "ok" for r in rows)
        assert all(0 < float(r[3]) < 1 for r in rows)


class TestValidateCommand:
    def test_defaults_pass(self, capsys):
        code = main(["validate"])
        out = capsys.readouterr().out
        assert code == 0
        assert "validate=pass" in out
        assert out.count("status=pass") == 5
        assert "lambda_effective=1.02e+07" in out

    def test_out_of_regime_three_level_flagged_not_failed(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "protocol": "cluster",
                "N": 2,
                "lambdas": 1.0,
                "kappa": 0.0,
                "three_level": {"g": 1.0, "omega": 1.0, "delta": 2.0},
            },
        )
        code = main(["validate", "--config", cfg])
        out = capsys.readouterr().out
        assert code == 0
        assert "check=three_level status=flagged" in out
        assert "validate=pass" in out

    def test_transfer_fidelity_degrades_out_of_regime(self):
        good = three_level_transfer_fidelity(1.0, 1.0, 10.0)
        bad = three_level_transfer_fidelity(1.0, 1.0, 2.0)
        assert good >= 0.99
        assert bad < 0.9
