"""Autoregressive SMILES sequence model: transformer, optimizer, sampling,
vocabulary, and checkpoint format."""

from .adam import OptimizerState, adam_step, init_optimizer
from .checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    CheckpointBundle,
    load_checkpoint,
    save_checkpoint,
)
from .sampling import greedy_decode, sample
from .transformer import (
    ModelConfig,
    Parameters,
    batched_sequence_log_probs,
    clone_params,
    forward,
    init_params,
    log_probs,
    nll_loss,
    nll_loss_and_grad,
    sequence_log_prob,
)
from .vocab import (
    BOS_ID,
    BOS_TEXT,
    EOS_ID,
    EOS_TEXT,
    PAD_ID,
    PAD_TEXT,
    TokenSequence,
    Vocab,
    build_vocab,
)

__all__ = [
    "BOS_ID",
    "BOS_TEXT",
    "CheckpointBundle",
    "EOS_ID",
    "EOS_TEXT",
    "FORMAT_VERSION",
    "MAGIC",
    "ModelConfig",
    "OptimizerState",
    "PAD_ID",
    "PAD_TEXT",
    "Parameters",
    "TokenSequence",
    "Vocab",
    "adam_step",
    "batched_sequence_log_probs",
    "build_vocab",
    "clone_params",
    "forward",
    "greedy_decode",
    "init_optimizer",
    "init_params",
    "load_checkpoint",
    "log_probs",
    "nll_loss",
    "nll_loss_and_grad",
    "sample",
    "save_checkpoint",
    "sequence_log_prob",
]
