"""Prompt risk stack: embeddings, weak labels, boosted-tree scoring,
paraphrase generation, and safest-variant selection."""
from .embedding import Embedding, EmbeddingProviderConfig, RemoteEndpoint, embed
from .lexicon import RiskLexicon, default_lexicon, heuristic_risk_label, lexicon_hits
from .gbt import GbtConfig, GbtRegressor, fit_gbt, predict_risk, load_gbt, save_gbt
from .paraphrase import ParaphraseClientConfig, paraphrase
from .selector import pick_safest, select_safest

__all__ = [
    "Embedding", "EmbeddingProviderConfig", "RemoteEndpoint", "embed",
    "RiskLexicon", "default_lexicon", "heuristic_risk_label", "lexicon_hits",
    "GbtConfig", "GbtRegressor", "fit_gbt", "predict_risk", "load_gbt", "save_gbt",
    "ParaphraseClientConfig", "paraphrase",
    "pick_safest", "select_safest",
]
