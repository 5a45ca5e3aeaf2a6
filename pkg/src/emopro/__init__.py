"""Two-stage prompt selection for LM-based emotional speech synthesis.

The static stage filters a candidate corpus by pitch statistics,
perceptual quality, textual emotional coherence, and measured in-model
performance; the dynamic stage picks the final prompt by semantic
relevance to the text being synthesized. All neural scorers are reached
through a uniform wire protocol with deterministic mocks for offline use.
"""

__version__ = "0.1.0"

from .clustering import Polarity
from .config import SelectionConfig, build_config
from .corpus import CandidatePool, EmotionLabel, PromptCandidate
from .dynamic import DynamicChoice, select_prompt
from .errors import EmoProError
from .model_perf import CandidatePerf, ProbeTextSet
from .pipeline import StaticSelectionResult, load_result, run_dynamic, run_static
from .pitch import F0Contour, PitchConfig, PitchStats
from .quality_gate import QualityScore

__all__ = [
    "CandidatePerf",
    "CandidatePool",
    "DynamicChoice",
    "EmoProError",
    "EmotionLabel",
    "F0Contour",
    "PitchConfig",
    "PitchStats",
    "Polarity",
    "ProbeTextSet",
    "PromptCandidate",
    "QualityScore",
    "SelectionConfig",
    "StaticSelectionResult",
    "__version__",
    "build_config",
    "load_result",
    "run_dynamic",
    "run_static",
    "select_prompt",
]
