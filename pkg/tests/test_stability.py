import json
import math

import numpy as np
import pytest

from simcal.calibrators import apply, fit_isotonic
from simcal.errors import ValidationError
from simcal.geometry import normalize
from simcal.stability import (
    CANONICAL_TYPES,
    OVERALL_LABEL,
    PerturbationPair,
    bundled_fixture_path,
    evaluate_stability,
    load_perturbation_dataset,
)

from conftest import random_isotonic_model


def recompute_row(scores, tau):
    """Straightforward reimplementation of the per-type statistics."""
    n = len(scores)
    mean = sum(scores) / n
    std = math.sqrt(sum((s - mean) ** 2 for s in scores) / n)
    rate = sum(1 for s in scores if s >= tau) / n
    return n, mean, std, rate


class TestBundledFixture:
    def test_contract(self):
        pairs = load_perturbation_dataset(bundled_fixture_path())
        assert len(pairs) == 35
        labels = {p.type_label for p in pairs}
        assert labels == set(CANONICAL_TYPES)
        for label in CANONICAL_TYPES:
            assert sum(1 for p in pairs if p.type_label == label) == 5

    def test_report_layout(self):
        pairs = load_perturbation_dataset(bundled_fixture_path())
        report = evaluate_stability(pairs, None, 0.72)
        assert len(report.rows) == 8
        assert [r.label for r in report.rows[:-1]] == list(CANONICAL_TYPES)
        assert report.rows[-1].label == OVERALL_LABEL
        assert report.similarity_label == "raw"


class TestLoader:
    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "a", "type": "TENSE_VARIATION", "raw_score": 0.9}\n{bad\n')
        with pytest.raises(ValidationError, match=":2"):
            load_perturbation_dataset(path)

    def test_missing_score_and_refs_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "a", "type": "TENSE_VARIATION", "text_a": "x", "text_b": "y"}\n')
        with pytest.raises(ValidationError, match=":1"):
            load_perturbation_dataset(path)

    def test_duplicate_ids_warn_and_keep(self, tmp_path):
        path = tmp_path / "d.jsonl"
        rows = [
            {"id": "a", "type": "TENSE_VARIATION", "raw_score": 0.9},
            {"id": "a", "type": "TENSE_VARIATION", "raw_score": 0.8},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        with pytest.warns(UserWarning, match="duplicate id"):
            pairs = load_perturbation_dataset(path)
        assert len(pairs) == 2

    def test_unknown_label_warns_and_keeps(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "a", "type": "SOMETHING_ELSE", "raw_score": 0.5}\n')
        with pytest.warns(UserWarning, match="unknown perturbation type"):
            pairs = load_perturbation_dataset(path)
        assert pairs[0].type_label == "SOMETHING_ELSE"

    def test_scores_from_embedding_refs(self, tmp_path):
        embs = {"e1": normalize([1.0, 1.0]), "e2": normalize([1.0, 0.0])}
        path = tmp_path / "d.jsonl"
        path.write_text(
            '{"id": "a", "type": "TENSE_VARIATION", "emb_ref_a": "e1", "emb_ref_b": "e2"}\n'
        )
        pairs = load_perturbation_dataset(path, embeddings=embs)
        assert pairs[0].raw_score == pytest.approx(math.cos(math.pi / 4), abs=1e-12)

    def test_missing_embedding_ref_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text(
            '{"id": "a", "type": "TENSE_VARIATION", "emb_ref_a": "nope", "emb_ref_b": "e2"}\n'
        )
        with pytest.raises(ValidationError, match="nope"):
            load_perturbation_dataset(path, embeddings={"e2": normalize([1.0, 0.0])})

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text("")
        with pytest.raises(ValidationError, match="empty"):
            load_perturbation_dataset(path)

    def test_out_of_range_score_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "a", "type": "TENSE_VARIATION", "raw_score": 1.5}\n')
        with pytest.raises(ValidationError, match=":1"):
            load_perturbation_dataset(path)


class TestEvaluate:
    @staticmethod
    def _pairs(rng, n_per_type=9):
        pairs = []
        for t, label in enumerate(CANONICAL_TYPES):
            for i in range(n_per_type):
                pairs.append(
                    PerturbationPair(
                        id=f"{label}-{i}",
                        type_label=label,
                        raw_score=float(rng.uniform(0.3, 0.99)),
                    )
                )
        return pairs

    def test_rows_match_recomputation(self):
        rng = np.random.default_rng(0)
        pairs = self._pairs(rng)
        tau = 0.7
        report = evaluate_stability(pairs, None, tau)
        for row in report.rows[:-1]:
            scores = [p.raw_score for p in pairs if p.type_label == row.label]
            n, mean, std, rate = recompute_row(scores, tau)
            assert row.n == n
            assert row.mean == pytest.approx(mean, abs=1e-12)
            assert row.std == pytest.approx(std, abs=1e-12)
            assert row.rate == pytest.approx(rate, abs=1e-12)

    def test_overall_row_pooled(self):
        rng = np.random.default_rng(1)
        pairs = self._pairs(rng)
        report = evaluate_stability(pairs, None, 0.7)
        overall = report.overall
        assert overall.n == sum(r.n for r in report.rows[:-1])
        pooled_mean = sum(p.raw_score for p in pairs) / len(pairs)
        assert overall.mean == pytest.approx(pooled_mean, abs=1e-12)

    def test_all_above_threshold(self):
        pairs = [
            PerturbationPair(id=str(i), type_label="TENSE_VARIATION", raw_score=0.9)
            for i in range(4)
        ]
        report = evaluate_stability(pairs, None, 0.5)
        assert all(r.rate == 1.0 for r in report.rows)

    def test_singleton_group_zero_std(self):
        pairs = [PerturbationPair(id="x", type_label="NOMINALIZATION", raw_score=0.8)]
        report = evaluate_stability(pairs, None, 0.5)
        assert report.rows[0].std == 0.0

    def test_reorder_invariance_exact(self):
        rng = np.random.default_rng(2)
        pairs = self._pairs(rng)
        report0 = evaluate_stability(pairs, None, 0.7)
        shuffled = list(pairs)
        rng.shuffle(shuffled)
        report1 = evaluate_stability(shuffled, None, 0.7)
        rows0 = {r.label: r for r in report0.rows}
        rows1 = {r.label: r for r in report1.rows}
        for label, row in rows0.items():
            assert abs(rows1[label].mean - row.mean) <= 1e-12
            assert abs(rows1[label].std - row.std) <= 1e-12
            assert rows1[label].rate == row.rate

    def test_calibrated_scores_used_with_model(self):
        rng = np.random.default_rng(3)
        pairs = self._pairs(rng)
        model = random_isotonic_model(rng, 50)
        report = evaluate_stability(pairs, model, 0.6)
        assert report.similarity_label == "calibrated"
        raw = np.array([p.raw_score for p in pairs])
        expected_mean = float(np.mean(apply(model, raw)))
        assert report.overall.mean == pytest.approx(expected_mean, abs=1e-12)

    def test_matched_threshold_consistency(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            pairs = self._pairs(rng, n_per_type=int(rng.integers(1, 12)))
            model = random_isotonic_model(rng)
            tau = float(rng.uniform(0.3, 0.95))
            raw_report = evaluate_stability(pairs, None, tau)
            cal_report = evaluate_stability(pairs, model, apply(model, tau))
            for raw_row, cal_row in zip(raw_report.rows, cal_report.rows):
                assert cal_row.rate >= raw_row.rate - 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            evaluate_stability([], None, 0.5)

    def test_render_formats(self):
        rng = np.random.default_rng(5)
        report = evaluate_stability(self._pairs(rng), None, 0.72)
        text = report.to_text()
        assert OVERALL_LABEL in text and "threshold 0.7200" in text
        csv = report.to_csv()
        assert csv.splitlines()[0] == "type,n,mean,std,rate"
        assert len(csv.strip().splitlines()) == 1 + 8
