import sys
import warnings

import numpy as np
import pytest

from sts_exporter.dataset import load_split
from sts_exporter.export import export, verify_manifest

# the package re-exports the `export` function under the submodule's name,
# so reach the module itself through sys.modules
export_mod = sys.modules["sts_exporter.export"]

STUB = "stub:24"


@pytest.fixture()
def exported(benchmark_file, tmp_path):
    out = tmp_path / "out"
    manifest = export(str(benchmark_file), STUB, out, batch_size=4)
    return out, manifest


class TestDataset:
    def test_local_jsonl(self, benchmark_file):
        rows = load_split(str(benchmark_file))
        assert len(rows) == 12
        assert all(0.0 <= r.score <= 5.0 for r in rows)

    def test_bad_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"sentence1": "a", "sentence2": "b", "score": 9.0}\n')
        with pytest.raises(ValueError, match=":1"):
            load_split(str(path))

    def test_unknown_split_name(self):
        with pytest.raises(ValueError, match="neither a file nor"):
            load_split("no-such-split")


class TestExportArtifacts:
    def test_three_files_and_manifest_digests(self, exported):
        out, manifest = exported
        for name in ("embeddings.bin", "pairs.jsonl", "manifest.json"):
            assert (out / name).is_file()
        checked = verify_manifest(out)
        assert checked.n_pairs == 12
        assert checked.dimension == 24
        assert checked.encoder_id == STUB

    def test_deterministic_re_export(self, benchmark_file, tmp_path):
        a = export(str(benchmark_file), STUB, tmp_path / "a")
        b = export(str(benchmark_file), STUB, tmp_path / "b")
        assert a.digests == b.digests  # timestamps differ, payloads must not

    def test_tampered_file_fails_verification(self, exported):
        out, _ = exported
        with (out / "pairs.jsonl").open("a", encoding="utf-8") as fh:
            fh.write("\n")
        with pytest.raises(ValueError, match="digest mismatch"):
            verify_manifest(out)

    def test_failure_leaves_no_partial_outputs(self, benchmark_file, tmp_path, monkeypatch):
        out = tmp_path / "out"

        def boom(path):
            raise RuntimeError("simulated hashing failure")

        monkeypatch.setattr(export_mod, "_sha256", boom)
        with pytest.raises(RuntimeError, match="simulated"):
            export(str(benchmark_file), STUB, out)
        assert not any(out.iterdir())


class TestPrimaryInterfaceRoundTrip:
    """The emitted files are read back with the consumer package; that is
    the only coupling between the two components."""

    def test_files_pass_primary_validators_without_warnings(self, exported):
        from simcal.geometry import read_embeddings
        from simcal.metrics import read_pairs

        out, _ = exported
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            records = read_embeddings(out / "embeddings.bin")
            pairs = read_pairs(out / "pairs.jsonl")
        assert caught == []
        assert len(records) == 2 * len(pairs) == 24

    def test_embeddings_unit_norm(self, exported):
        from simcal.geometry import read_embeddings

        out, _ = exported
        for rec in read_embeddings(out / "embeddings.bin"):
            assert abs(np.linalg.norm(rec.vector) - 1.0) <= 1e-6

    def test_scores_match_primary_cosine_recomputation(self, exported):
        from simcal.geometry import cosine, read_embeddings
        from simcal.metrics import read_pairs

        out, _ = exported
        vectors = {rec.id: rec.vector for rec in read_embeddings(out / "embeddings.bin")}
        for pair in read_pairs(out / "pairs.jsonl"):
            recomputed = cosine(vectors[f"{pair.id}#a"], vectors[f"{pair.id}#b"])
            assert abs(recomputed - pair.model_score) <= 1e-6

    def test_human_scores_are_rescaled_labels(self, exported, benchmark_file):
        from simcal.metrics import read_pairs

        out, _ = exported
        rows = {r.id: r for r in load_split(str(benchmark_file))}
        for pair in read_pairs(out / "pairs.jsonl"):
            assert pair.human_score == pytest.approx(rows[pair.id].score / 5.0, abs=1e-12)
