import json
import subprocess
import sys

import pytest

from sts_exporter.export import export
from sts_exporter.spot_check import compute_metrics, spot_check


def run_primary_evaluate(pairs_path, out_dir):
    """The consumer's `evaluate` through its CLI, the public interface."""
    proc = subprocess.run(
        [sys.executable, "-m", "simcal", "evaluate",
         "--input", str(pairs_path), "--out-dir", str(out_dir)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads((out_dir / "metrics.json").read_text())


class TestComputeMetrics:
    def test_identical_scores_are_perfect(self):
        values = [0.1, 0.4, 0.8, 0.65, 0.3]
        result = compute_metrics(values, list(values))
        assert result["rmse"] == 0.0
        assert result["mbe"] == 0.0
        assert result["ece"] == 0.0
        assert result["pearson"] == pytest.approx(1.0, abs=1e-12)
        assert result["spearman"] == pytest.approx(1.0, abs=1e-12)

    def test_constant_shift_bias(self):
        human = [0.2, 0.4, 0.6]
        model = [h + 0.1 for h in human]
        result = compute_metrics(model, human)
        assert result["mbe"] == pytest.approx(0.1, abs=1e-12)
        assert result["rmse"] == pytest.approx(0.1, abs=1e-12)

    def test_undefined_correlation_rejected(self):
        with pytest.raises(ValueError, match="undefined correlation"):
            compute_metrics([0.5, 0.5], [0.1, 0.9])


class TestCrossImplementationAgreement:
    def test_spot_check_matches_primary_evaluate(self, benchmark_file, tmp_path):
        out = tmp_path / "export"
        export(str(benchmark_file), "stub:24", out)
        mine = spot_check(out / "pairs.jsonl")
        theirs = run_primary_evaluate(out / "pairs.jsonl", tmp_path / "eval")
        assert mine["n"] == theirs["n"]
        for key in ("rmse", "mbe", "ece", "pearson", "spearman"):
            assert mine[key] == pytest.approx(theirs[key], abs=1e-9), key

    def test_agreement_on_reference_fixture(self, tmp_path):
        from pathlib import Path

        fixture = Path(__file__).resolve().parents[2] / "data" / "reference_pairs.jsonl"
        mine = spot_check(fixture)
        theirs = run_primary_evaluate(fixture, tmp_path / "eval")
        for key in ("rmse", "mbe", "ece", "pearson", "spearman"):
            assert mine[key] == pytest.approx(theirs[key], abs=1e-9), key
