"""Rendering of persisted selection results as plain-text tables."""

from __future__ import annotations

from .errors import ResultError
from .pipeline import STATUS_COMPLETE, StaticSelectionResult

NO_CANDIDATES = "no candidates"

HEADER = "prompt_id | cer | spk_sim_a | spk_sim_b | emo_sim"


def format_row(
    candidate_id: str, mean_cer: float, spk_a: float, spk_b: float, emo: float
) -> str:
    """One table row; dot-decimal regardless of locale."""
    return (
        f"{candidate_id} | {mean_cer * 100:.2f}% | "
        f"{spk_a:.4f} | {spk_b:.4f} | {emo:.4f}"
    )


def render_report(result: StaticSelectionResult) -> str:
    """Per-candidate metric rows for the top-k, best first."""
    if result.status != STATUS_COMPLETE:
        raise ResultError(
            f"cannot report on a result marked {result.status!r}"
            + (f": {result.failure}" if result.failure else "")
        )
    lines = [
        f"speaker {result.speaker_id}, emotion {result.emotion}, "
        f"config {result.config_hash[:12]}",
        f"stages: {len(result.pool_ids)} -> {len(result.post_pitch_ids)} -> "
        f"{len(result.post_quality_ids)} -> {len(result.top_k_ids)}",
        "",
    ]
    if not result.top_k_ids:
        lines.append(NO_CANDIDATES)
        return "\n".join(lines)
    lines.append(HEADER)
    for cid in result.top_k_ids:
        perf = result.perf.get(cid)
        if perf is None:
            raise ResultError(f"result file lacks metrics for {cid!r}")
        lines.append(
            format_row(
                cid,
                perf["mean_cer"],
                perf["mean_spk_a"],
                perf["mean_spk_b"],
                perf["mean_emo"],
            )
        )
    return "\n".join(lines)
