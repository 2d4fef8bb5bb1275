from .augment import AugmentSpec, augment_eeg
from .losses import cross_entropy_logits, double_softmax_ce
from .metrics import MetricsReport, evaluate_metrics
from .mlp import MlpClassifier, param_count
from .optim import AdamW, adamw_step, cosine_lr
from .trainer import Standardizer, TrainConfig, fit, predict, train_classifier

__all__ = [
    "AdamW", "AugmentSpec", "MetricsReport", "MlpClassifier", "Standardizer", "TrainConfig",
    "adamw_step", "augment_eeg", "cosine_lr", "cross_entropy_logits", "double_softmax_ce",
    "evaluate_metrics", "fit", "param_count", "predict", "train_classifier",
]
