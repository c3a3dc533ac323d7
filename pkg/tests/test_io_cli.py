import json
import shutil
from pathlib import Path

import pytest

from conftest import FEB, household, person, sample, single_household
from incomenowcast import io
from incomenowcast.cli import main
from incomenowcast.errors import ConfigError, DataError
from incomenowcast.pipeline import (
    derive_seed,
    interpolate_target,
    load_config,
    validate,
)
from incomenowcast.records import MonthId
from incomenowcast.synthpop import SynthConfig, gen_baseline_survey, gen_payroll

CONFIGS = Path(__file__).parent.parent / "configs"


def small_config(tmp_path, **extra):
    cfg = {
        "seed": 77,
        "baseline_month": "2020-02",
        "analysis_months": ["2020-04"],
        "regimes": {
            "baseline": str(CONFIGS / "regime_baseline_feb2020.json"),
            "reform": str(CONFIGS / "regime_covid_package.json"),
        },
        "synth": {
            "n_households": 700,
            "panel_households": 600,
            "n_panel_waves": 3,
            "population_households": 9900000,
        },
        "index": {"series_csv": str(CONFIGS / "index_series.csv")},
        "alignment": {
            "jobkeeper_targets": {"2020-04": 3400000},
            "eligibility_targets": {"2020-04": 250000},
            "noise_scale": 1.0,
        },
        "output_dir": str(tmp_path / "out"),
        "options": {"trim_quantile": 0.995},
    }
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestSampleCsvRoundTrip:
    def test_round_trip_preserves_sample(self, tmp_path):
        cfg = SynthConfig(seed=13, n_households=120)
        s = gen_baseline_survey(cfg)
        io.write_sample(s, tmp_path / "p.csv", tmp_path / "h.csv")
        again = io.load_sample(tmp_path / "p.csv", tmp_path / "h.csv", FEB)
        assert again == s

    def test_unknown_industry_row_number(self, tmp_path):
        s = sample([single_household("h1")], FEB)
        io.write_sample(s, tmp_path / "p.csv", tmp_path / "h.csv")
        text = (tmp_path / "p.csv").read_text().replace("retail_trade", "blacksmithing")
        (tmp_path / "p.csv").write_text(text)
        with pytest.raises(DataError, match=r"p\.csv:2.*blacksmithing"):
            io.load_sample(tmp_path / "p.csv", tmp_path / "h.csv", FEB)

    def test_missing_column_rejected(self, tmp_path):
        (tmp_path / "p.csv").write_text("person_id\nx\n")
        with pytest.raises(DataError, match="missing person columns"):
            io.read_persons(tmp_path / "p.csv")

    def test_payroll_round_trip(self, tmp_path):
        series = gen_payroll(SynthConfig(seed=3, n_households=10))
        io.write_payroll(series, tmp_path / "payroll.csv")
        again = io.read_payroll(tmp_path / "payroll.csv", series.baseline_month)
        assert again.cells == dict(series.cells)


class TestConfig:
    def test_load_and_validate_demo(self):
        cfg = load_config(CONFIGS / "demo.json")
        assert validate(cfg) == []
        assert cfg.seed == 20200615
        assert cfg.jobkeeper_targets[MonthId(2020, 5)] == 3500000

    def test_relative_paths_resolve_against_config(self, tmp_path):
        shutil.copy(CONFIGS / "regime_baseline_feb2020.json", tmp_path / "b.json")
        shutil.copy(CONFIGS / "regime_covid_package.json", tmp_path / "r.json")
        path = small_config(
            tmp_path, regimes={"baseline": "b.json", "reform": "r.json"}
        )
        cfg = load_config(path)
        assert cfg.regime_baseline_path == tmp_path / "b.json"

    def test_month_ordering_finding(self, tmp_path):
        path = small_config(tmp_path, analysis_months=["2020-01"])
        findings = validate(load_config(path))
        assert any("does not follow baseline" in f for f in findings)

    def test_missing_regime_finding(self, tmp_path):
        path = small_config(
            tmp_path,
            regimes={"baseline": "missing.json", "reform": str(CONFIGS / "regime_covid_package.json")},
        )
        findings = validate(load_config(path))
        assert any("missing.json" in f for f in findings)

    def test_bad_data_row_is_a_finding(self, tmp_path):
        s = sample([single_household("h1")], FEB)
        io.write_sample(s, tmp_path / "p.csv", tmp_path / "h.csv")
        text = (tmp_path / "p.csv").read_text().replace("retail_trade", "alchemy")
        (tmp_path / "p.csv").write_text(text)
        io.write_payroll(gen_payroll(SynthConfig(seed=1, n_households=5)), tmp_path / "pay.csv")
        cfg_dict = {
            "data": {
                "persons": "p.csv",
                "households": "h.csv",
                "panel": [
                    {"month": "2020-02", "persons": "p.csv", "households": "h.csv"},
                    {"month": "2020-04", "persons": "p.csv", "households": "h.csv"},
                ],
                "payroll": "pay.csv",
            }
        }
        path = small_config(tmp_path, **cfg_dict)
        # remove the synth block so the data block is used
        data = json.loads(path.read_text())
        del data["synth"]
        path.write_text(json.dumps(data))
        findings = validate(load_config(path))
        assert any("alchemy" in f for f in findings)

    def test_config_without_source_rejected(self, tmp_path):
        path = small_config(tmp_path)
        data = json.loads(path.read_text())
        del data["synth"]
        path.write_text(json.dumps(data))
        with pytest.raises(ConfigError, match="synth block or a data block"):
            load_config(path)

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/config.json")


class TestHelpers:
    def test_derive_seed_stable_and_distinct(self):
        a = derive_seed(42, "align:2020-04")
        assert a == derive_seed(42, "align:2020-04")
        assert a != derive_seed(42, "align:2020-05")
        assert a != derive_seed(43, "align:2020-04")

    def test_interpolation(self):
        anchors = {MonthId(2020, 4): 100.0, MonthId(2020, 6): 300.0}
        assert interpolate_target(anchors, MonthId(2020, 4)) == 100.0
        assert interpolate_target(anchors, MonthId(2020, 5)) == 200.0
        assert interpolate_target(anchors, MonthId(2020, 3)) == 100.0
        assert interpolate_target(anchors, MonthId(2020, 7)) == 300.0


class TestCli:
    def test_validate_ok(self, capsys):
        assert main(["validate", "--config", str(CONFIGS / "demo.json")]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_missing_regime_file_exits_one_and_names_path(self, tmp_path, capsys):
        path = small_config(
            tmp_path,
            regimes={
                "baseline": "missing_regime.json",
                "reform": str(CONFIGS / "regime_covid_package.json"),
            },
        )
        code = main(["run", "--config", str(path)])
        err = capsys.readouterr().err
        assert code == 1
        assert "missing_regime.json" in err

    def test_run_small_end_to_end(self, tmp_path, capsys):
        path = small_config(tmp_path)
        code = main(["run", "--config", str(path)])
        assert code == 0
        out = tmp_path / "out"
        assert (out / "manifest.json").exists()
        assert (out / "poverty.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 77

    def test_out_override(self, tmp_path):
        path = small_config(tmp_path)
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "alt")])
        assert code == 0
        assert (tmp_path / "alt" / "manifest.json").exists()

    def test_relative_out_override_resolves_against_cwd(self, tmp_path, monkeypatch):
        config_dir = tmp_path / "cfgs"
        config_dir.mkdir()
        path = small_config(config_dir)
        workdir = tmp_path / "work"
        workdir.mkdir()
        monkeypatch.chdir(workdir)
        code = main(["run", "--config", str(path), "--out", "rel_out"])
        assert code == 0
        assert (workdir / "rel_out" / "manifest.json").exists()
        assert not (config_dir / "rel_out").exists()

    def test_gen_synth(self, tmp_path):
        path = small_config(tmp_path)
        code = main(["gen-synth", "--config", str(path), "--out", str(tmp_path / "synth")])
        assert code == 0
        assert (tmp_path / "synth" / "survey_persons.csv").exists()
        assert (tmp_path / "synth" / "panel_2020-03_persons.csv").exists()
        assert (tmp_path / "synth" / "payroll.csv").exists()

    def test_infeasible_alignment_exits_two(self, tmp_path, capsys):
        path = small_config(
            tmp_path, alignment={"jobkeeper_targets": {"2020-04": 1e12}, "noise_scale": 1.0}
        )
        code = main(["run", "--config", str(path)])
        assert code == 2
        assert "alignment" in capsys.readouterr().err
