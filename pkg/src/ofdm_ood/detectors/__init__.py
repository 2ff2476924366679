"""OOD detectors: maximum softmax probability, metric learning, VAE, autoregressive LLR."""

from .api import (
    DESK_PRESETS,
    KINDS,
    build_detector,
    from_checkpoint,
    score_examples,
    to_checkpoint,
    train_detector,
    train_echo,
)
from .ar import (
    ArDetector,
    ar_llr_score,
    ar_nll,
    ar_sample,
    ar_sequence,
    ar_train,
    check_twins,
    gaussian_nll,
)
from .dml import cosine_similarity, dml_score, dml_train, proxy_anchor_loss
from .models import ArModel, DmlModel, MspModel, VaeModel, build_model, parameter_count
from .msp import msp_loss, msp_score, msp_train, uniform_cross_entropy
from .training import OeConfig, TrainConfig, TrainingError
from .vae import kl_monte_carlo, kl_to_standard_normal, vae_loss, vae_score, vae_train

__all__ = [
    "DESK_PRESETS", "KINDS", "ArDetector", "ArModel", "DmlModel", "MspModel", "OeConfig",
    "TrainConfig", "TrainingError", "VaeModel", "ar_llr_score", "ar_nll", "ar_sample", "ar_sequence",
    "ar_train", "build_detector", "build_model", "check_twins", "cosine_similarity",
    "dml_score", "dml_train", "from_checkpoint", "gaussian_nll", "kl_monte_carlo",
    "kl_to_standard_normal", "msp_loss", "msp_score", "msp_train", "parameter_count",
    "proxy_anchor_loss", "score_examples", "to_checkpoint", "train_detector", "train_echo",
    "uniform_cross_entropy", "vae_loss", "vae_score", "vae_train",
]
