"""Two-layer graph isomorphism network for structural Trojan scoring."""
from .model import GinLayer, GinModel, forward, predict_proba
from .train import GinTrainConfig, train
from .io import save_model, load_model

__all__ = [
    "GinLayer", "GinModel", "forward", "predict_proba",
    "GinTrainConfig", "train", "save_model", "load_model",
]
