"""Static-stage orchestration, result persistence, and dynamic selection."""

import dataclasses
import json

import pytest

from emopro import wavio
from emopro.backends import BackendSet, MockFixture, build_mock_suite
from emopro.config import build_config
from emopro.corpus import EmotionLabel
from emopro.errors import PipelineError, ResultError
from emopro.pipeline import (
    SCHEMA_VERSION,
    StaticSelectionResult,
    load_result,
    run_dynamic,
    run_static,
    save_result,
)
from emopro.synth import build_corpus

from .conftest import RATE, sine


def scrubbed(path) -> dict:
    data = json.loads(path.read_text(encoding="utf-8"))
    data.pop("created_at")
    data.pop("elapsed_s")
    return data


@pytest.fixture(scope="module")
def static_run(tmp_path_factory):
    """One full static run over a 24-candidate corpus with a silent extra."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus = build_corpus(root / "corpus", num_blobs=4, per_blob=6, seed=77)

    silent_path = root / "corpus" / "audio" / "zz_silent.wav"
    tag = {
        "speaker": corpus.speaker_id,
        "emotion": corpus.emotion.value,
        "pid": "zz_silent",
        "text": "a silent placeholder row",
    }
    wavio.write_wav(silent_path, RATE, 0.0 * sine(100.0, 0.8), tag=tag)
    with corpus.manifest_path.open("a", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {
                    "id": "zz_silent",
                    "speaker": corpus.speaker_id,
                    "emotion": corpus.emotion.value,
                    "audio": "audio/zz_silent.wav",
                    "text": "a silent placeholder row",
                }
            )
            + "\n"
        )

    probe_file = root / "probes.txt"
    probe_file.write_text(
        "the first probe sentence\n"
        "a second probe sentence\n"
        "one more probe sentence\n"
        "the final probe sentence\n",
        encoding="utf-8",
    )
    config = build_config(
        overrides={
            "num_clusters": 4,
            "m": 2,
            "n_percent": 25.0,
            "k": 3,
            "seed": 13,
            "probe_texts": str(probe_file),
        },
        env={},
    )
    fixture = MockFixture.from_json(corpus.fixture_path)
    suite = build_mock_suite(fixture)
    backends = BackendSet.from_mocks(suite)
    out_path = root / "result.json"
    result = run_static(
        config,
        corpus.manifest_path,
        corpus.speaker_id,
        corpus.emotion,
        backends,
        out_path,
    )
    return corpus, config, backends, result, out_path


def test_stage_sizes_and_containment(static_run):
    corpus, config, _, result, _ = static_run
    assert result.status == "complete"
    assert len(result.pool_ids) == 25
    assert len(result.post_pitch_ids) == 12  # two of four 6-candidate blobs
    assert len(result.post_quality_ids) == 3  # ceil(25% of 12)
    assert len(result.top_k_ids) == 3
    assert set(result.top_k_ids) <= set(result.post_quality_ids)
    assert set(result.post_quality_ids) <= set(result.post_pitch_ids)
    assert set(result.post_pitch_ids) <= set(result.pool_ids)


def test_high_polarity_keeps_the_two_highest_blobs(static_run):
    corpus, _, _, result, _ = static_run
    expected = set(corpus.ids_by_blob[2]) | set(corpus.ids_by_blob[3])
    assert set(result.post_pitch_ids) == expected


def test_silent_candidate_is_dropped_before_clustering(static_run):
    _, _, _, result, _ = static_run
    assert "zz_silent" in result.pool_ids
    assert "zz_silent" not in result.pitch_stats
    assert "zz_silent" not in result.post_pitch_ids


def test_result_file_round_trips(static_run):
    _, _, _, result, out_path = static_run
    loaded = load_result(out_path)
    assert loaded == result
    assert loaded.schema_version == SCHEMA_VERSION
    assert not out_path.with_suffix(".json.tmp").exists()


def test_perf_metrics_cover_the_ranked_candidates(static_run):
    _, _, _, result, _ = static_run
    for cid in result.top_k_ids:
        perf = result.perf[cid]
        assert 0.0 <= perf["mean_cer"]
        assert perf["rank_score"] >= 4
    ranks = [result.perf[cid]["rank_score"] for cid in result.top_k_ids]
    assert ranks == sorted(ranks)


def test_rerun_is_identical_except_timestamps(static_run, tmp_path):
    corpus, config, backends, _, out_path = static_run
    second_path = tmp_path / "again.json"
    run_static(
        config,
        corpus.manifest_path,
        corpus.speaker_id,
        corpus.emotion,
        backends,
        second_path,
    )
    assert scrubbed(out_path) == scrubbed(second_path)


def test_failure_persists_a_partial_result(static_run, tmp_path):
    corpus, config, _, _, _ = static_run
    out_path = tmp_path / "failed.json"
    unbound = BackendSet()  # no mocks, no endpoints
    with pytest.raises(PipelineError, match="no backend configured"):
        run_static(
            config,
            corpus.manifest_path,
            corpus.speaker_id,
            corpus.emotion,
            unbound,
            out_path,
        )
    partial = load_result(out_path)
    assert partial.status == "failed"
    assert "no backend configured" in partial.failure
    assert len(partial.pool_ids) == 25
    assert len(partial.post_pitch_ids) == 12
    assert partial.post_quality_ids == []
    assert partial.top_k_ids == []


def test_dynamic_selection_uses_the_semantic_table(static_run):
    _, _, _, result, _ = static_run
    target_id = result.top_k_ids[-1]
    target_text = "please read this exact sentence"
    fixture = MockFixture(
        semantic={result.transcripts[target_id]: 1.0},
    )
    backends = BackendSet.from_mocks(build_mock_suite(fixture))
    choice = run_dynamic(result, target_text, backends)
    assert choice.chosen_id == target_id
    assert choice.fallback is False
    assert [s.candidate_id for s in choice.scores] == result.top_k_ids


def test_dynamic_refuses_failed_results(static_run):
    _, _, backends, result, _ = static_run
    failed = dataclasses.replace(result, status="failed", failure="boom")
    with pytest.raises(ResultError, match="boom"):
        run_dynamic(failed, "some text", backends)


def test_dynamic_needs_transcripts_for_the_topk(static_run):
    _, _, backends, result, _ = static_run
    broken = dataclasses.replace(
        result, transcripts={k: v for k, v in list(result.transcripts.items())[:1]}
    )
    if result.top_k_ids[0] in broken.transcripts:
        broken.transcripts.pop(result.top_k_ids[0])
    with pytest.raises(ResultError, match="transcript"):
        run_dynamic(broken, "some text", backends)


def test_load_result_rejects_foreign_files(tmp_path):
    path = tmp_path / "r.json"
    path.write_text("{broken", encoding="utf-8")
    with pytest.raises(ResultError, match="not valid JSON"):
        load_result(path)
    path.write_text("[1]", encoding="utf-8")
    with pytest.raises(ResultError, match="JSON object"):
        load_result(path)
    path.write_text(json.dumps({"schema_version": 99}), encoding="utf-8")
    with pytest.raises(ResultError, match="schema_version 99"):
        load_result(path)
    good = {
        "config": {},
        "config_hash": "x",
        "manifest_path": "m",
        "speaker_id": "s",
        "emotion": "happy",
        "schema_version": SCHEMA_VERSION,
        "surprise_field": 1,
    }
    path.write_text(json.dumps(good), encoding="utf-8")
    with pytest.raises(ResultError, match="unexpected fields"):
        load_result(path)


def test_containment_check_catches_corruption():
    result = StaticSelectionResult(
        config={},
        config_hash="x",
        manifest_path="m",
        speaker_id="s",
        emotion="happy",
        pool_ids=["a"],
        post_pitch_ids=["a"],
        post_quality_ids=["a"],
        top_k_ids=["a", "intruder"],
    )
    with pytest.raises(PipelineError, match="containment"):
        result.check_containment()


def test_save_result_writes_sorted_pretty_json(tmp_path):
    result = StaticSelectionResult(
        config={"seed": 1},
        config_hash="x",
        manifest_path="m",
        speaker_id="s",
        emotion="happy",
    )
    path = tmp_path / "out" / "r.json"
    save_result(result, path)
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    data = json.loads(text)
    assert list(data) == sorted(data)
