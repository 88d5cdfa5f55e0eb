import json
import re

import pytest

from conftest import sine_records, write_csv_dataset
from widefeat.cli import main
from widefeat.metrics import METRIC_NAMES


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def toy_manifest(tmp_path):
    records = sine_records(n_records=20, n=128, rate=100.0, seed=2)[:4]
    # keep both classes
    assert {r.label for r in records} == {0, 1}
    return write_csv_dataset(tmp_path, records, rate=100.0)


FAST_RECOMMEND = {
    "tau": 0.9, "p": 5, "seed": 5, "k_schedule": [5], "c": 0, "max_level_cap": 1,
    "evaluation": {"kernels": ["linear", "rbf"], "c_grid": [1.0, 10.0]},
}


class TestExtract:
    def test_toy_manifest_level0(self, toy_manifest, tmp_path, capsys):
        out = tmp_path / "runs"
        assert run_cli("extract", toy_manifest, "--out", out, "--max-level", 0) == 0
        printed = capsys.readouterr().out
        assert "level 0" in printed
        run_dir = next(out.iterdir())
        lines = (run_dir / "features.csv").read_text().splitlines()
        assert len(lines) == 5  # header + 4 records

    def test_determinism_byte_identical(self, toy_manifest, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli("extract", toy_manifest, "--out", out_a, "--max-level", 2) == 0
        assert run_cli("extract", toy_manifest, "--out", out_b, "--max-level", 2) == 0
        csv_a = (next(out_a.iterdir()) / "features.csv").read_bytes()
        csv_b = (next(out_b.iterdir()) / "features.csv").read_bytes()
        assert csv_a == csv_b
        desc_a = (next(out_a.iterdir()) / "descriptors.json").read_bytes()
        desc_b = (next(out_b.iterdir()) / "descriptors.json").read_bytes()
        assert desc_a == desc_b

    def test_higher_level_strictly_more_columns(self, toy_manifest, tmp_path):
        cols = {}
        for level in (1, 2):
            out = tmp_path / f"lvl{level}"
            assert run_cli("extract", toy_manifest, "--out", out, "--max-level", level) == 0
            header = (next(out.iterdir()) / "features.csv").read_text().splitlines()[0]
            cols[level] = header.count(",")
        assert cols[2] > cols[1]

    def test_extraction_config_file_honored(self, toy_manifest, tmp_path):
        config = tmp_path / "extract.json"
        config.write_text(json.dumps({
            "stft": {"window": 64, "hop": 32},
            "dwt": {"bank": ["haar", "db2"], "depth": 3},
            "max_level": 1,
        }))
        out = tmp_path / "runs"
        assert run_cli("extract", toy_manifest, "--config", config, "--out", out) == 0
        header = (next(out.iterdir()) / "features.csv").read_text().splitlines()[0]
        assert "dwt(" in header
        assert "detail3" in header and "detail4" not in header

    def test_out_dir_env_var(self, toy_manifest, tmp_path, monkeypatch):
        target = tmp_path / "from_env"
        monkeypatch.setenv("WIDEFEAT_OUT", str(target))
        monkeypatch.chdir(tmp_path)
        assert run_cli("extract", toy_manifest, "--max-level", 0) == 0
        assert target.exists() and any(target.iterdir())


class TestRecommend:
    def test_planted_fixture_succeeds(self, planted_manifest, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(FAST_RECOMMEND))
        out = tmp_path / "runs"
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", out) == 0
        printed = capsys.readouterr().out
        match = re.search(r"Fe1 mean test accuracy: ([0-9.]+)", printed)
        assert match and float(match.group(1)) >= 0.9
        run_dir = next(out.iterdir())
        payload = json.loads((run_dir / "recommendation.json").read_text())
        assert payload["schema_version"] == 1
        assert payload["target_met"] is True
        assert (run_dir / "lineage_report.txt").exists()

    def test_unattainable_tau_flags_target(self, planted_manifest, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({**FAST_RECOMMEND, "tau": 1.01, "max_level_cap": 0}))
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", tmp_path / "runs") == 0
        printed = capsys.readouterr().out
        assert "target not met" in printed

    def test_missing_config_file(self, planted_manifest, tmp_path):
        assert run_cli("recommend", planted_manifest, "--config",
                       tmp_path / "nope.json", "--out", tmp_path / "runs") == 2

    def test_seed_required(self, planted_manifest, tmp_path):
        config = tmp_path / "cfg.json"
        raw = dict(FAST_RECOMMEND)
        raw.pop("seed")
        config.write_text(json.dumps(raw))
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", tmp_path / "runs") == 2

    def test_json_artifacts_reproducible(self, planted_manifest, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(FAST_RECOMMEND))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("recommend", planted_manifest, "--config", config,
                           "--out", out) == 0
            run_dir = next(out.iterdir())
            outs.append(((run_dir / "recommendation.json").read_bytes(),
                         (run_dir / "metrics.json").read_bytes()))
        assert outs[0] == outs[1]

    def test_flag_overrides(self, planted_manifest, tmp_path):
        out = tmp_path / "runs"
        assert run_cli("recommend", planted_manifest, "--out", out, "--seed", 9,
                       "--tau", 0.9, "--k", "5", "--max-level", 0, "--folds", 5) == 0
        run_dir = next(out.iterdir())
        payload = json.loads((run_dir / "recommendation.json").read_text())
        assert payload["config"]["seed"] == 9
        assert payload["config"]["max_level_cap"] == 0
        assert payload["config"]["k_schedule"] == [5]


class TestBaselinePca:
    def test_grid_blocks_and_schema(self, planted_manifest, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({
            **FAST_RECOMMEND, "pca": {"grid": [2, 5, 10], "kernel": "rbf"}}))
        out = tmp_path / "runs"
        assert run_cli("baseline-pca", planted_manifest, "--config", config,
                       "--out", out) == 0
        run_dir = next(out.iterdir())
        payload = json.loads((run_dir / "metrics.json").read_text())
        assert payload["method"] == "pca"
        assert 1 <= len(payload["runs"]) <= 3
        for block in payload["runs"]:
            assert set(block["metrics"]) == set(METRIC_NAMES)

    def test_schema_matches_recommend_metrics(self, planted_manifest, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(FAST_RECOMMEND))
        out_wide = tmp_path / "wide"
        out_pca = tmp_path / "pca"
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", out_wide) == 0
        assert run_cli("baseline-pca", planted_manifest, "--config", config,
                       "--out", out_pca) == 0
        wide = json.loads((next(out_wide.iterdir()) / "metrics.json").read_text())
        pca = json.loads((next(out_pca.iterdir()) / "metrics.json").read_text())
        assert set(wide["metrics"]) == set(pca["runs"][0]["metrics"])


class TestReport:
    def test_single_and_combined_rows(self, planted_manifest, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(FAST_RECOMMEND))
        out = tmp_path / "runs"
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", out) == 0
        capsys.readouterr()
        assert run_cli("report", out) == 0
        printed = capsys.readouterr().out
        table_lines = [l for l in printed.splitlines()
                       if l and not l.startswith("summary")]
        assert len(table_lines) == 3  # header, rule, one row
        assert run_cli("baseline-pca", planted_manifest, "--config", config,
                       "--out", out) == 0
        capsys.readouterr()
        assert run_cli("report", out) == 0
        printed = capsys.readouterr().out
        rows = [l for l in printed.splitlines()
                if l.startswith(("wide", "pca["))]
        assert len(rows) == 2

    def test_csv_round_trip(self, planted_manifest, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(FAST_RECOMMEND))
        out = tmp_path / "runs"
        assert run_cli("recommend", planted_manifest, "--config", config,
                       "--out", out) == 0
        assert run_cli("report", out) == 0
        lines = (out / "summary.csv").read_text().splitlines()
        header = lines[0].split(",")
        row = lines[1].split(",")
        parsed = dict(zip(header, row))
        for name in METRIC_NAMES:
            value = float(parsed[name])
            assert f"{value:.6g}" == parsed[name]

    def test_empty_dir(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert run_cli("report", empty) == 2


def test_console_script_help():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "widefeat.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("extract", "recommend", "baseline-pca", "report"):
        assert sub in proc.stdout
