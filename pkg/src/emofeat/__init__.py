"""Domain-feature pipelines (EEG, audio, vision), toy-scale factorized
attention with gradient verification, and a small training stack."""

from .audio import AudioClip, extract_audio_features
from .eeg import EegTrial, extract_eeg_features
from .numkit import Rng
from .vision import FrameSequence, extract_vision_features

__all__ = [
    "AudioClip",
    "EegTrial",
    "FrameSequence",
    "Rng",
    "extract_audio_features",
    "extract_eeg_features",
    "extract_vision_features",
]
__version__ = "0.1.0"
