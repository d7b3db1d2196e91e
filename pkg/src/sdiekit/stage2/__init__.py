from .encoder import BuiltinEncoder, BuiltinEncoderConfig
from .head import ClassificationHead, ce_loss_and_grad, head_forward, softmax
from .optim import Adam, adam_step
from .train import (
    Stage2Hyperparams,
    Stage2Model,
    classify,
    load_model,
    predict_batch,
    save_model,
    train_fold,
)

__all__ = [
    "Adam",
    "BuiltinEncoder",
    "BuiltinEncoderConfig",
    "ClassificationHead",
    "Stage2Hyperparams",
    "Stage2Model",
    "adam_step",
    "ce_loss_and_grad",
    "classify",
    "head_forward",
    "load_model",
    "predict_batch",
    "save_model",
    "softmax",
    "train_fold",
]
