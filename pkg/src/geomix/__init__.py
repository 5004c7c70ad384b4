"""Context-mixing compression with geometric, linear and beta weighting."""

from .core import Distribution, PredictionSet, WeightVector, code_length, entropy, kl_divergence, squash, stretch
from .engine import (
    CodecConfig,
    CodecFrame,
    CorruptionError,
    FrameError,
    TruncatedFrameError,
    coding_cost,
    compress,
    decompress,
    ideal_code_length,
)
from .mixers import MixerState, mix_geometric, mix_linear, mix_logistic, new_state

__all__ = [
    "CodecConfig",
    "CodecFrame",
    "CorruptionError",
    "Distribution",
    "FrameError",
    "MixerState",
    "PredictionSet",
    "TruncatedFrameError",
    "WeightVector",
    "code_length",
    "coding_cost",
    "compress",
    "decompress",
    "entropy",
    "ideal_code_length",
    "kl_divergence",
    "mix_geometric",
    "mix_linear",
    "mix_logistic",
    "new_state",
    "squash",
    "stretch",
]

__version__ = "0.1.0"
