from .cost import CostReport, attention_cost
from .gradcheck import grad_check, run_suite
from .layers import (MultiHeadAttention, SeBlock, SkipGate, scaled_dot_attention, se_forward,
                     se_param_count, skip_gate_fuse)
from .models import (DualAttention, EegTransformerBaseline, SpaceTimeAttention, TriStreamConfig,
                     TriStreamModel)

__all__ = [
    "CostReport", "DualAttention", "EegTransformerBaseline", "MultiHeadAttention", "SeBlock",
    "SkipGate", "SpaceTimeAttention", "TriStreamConfig", "TriStreamModel", "attention_cost",
    "grad_check", "run_suite", "scaled_dot_attention", "se_forward", "se_param_count",
    "skip_gate_fuse",
]
