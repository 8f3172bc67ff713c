"""Safest-variant selection: argmin of predicted risk, ties to lowest index."""
from __future__ import annotations

from ..errors import EmptyCandidateListError
from .embedding import EmbeddingProviderConfig, embed
from .gbt import GbtRegressor, predict_risk


def pick_safest(scores) -> int:
    """Index of the lowest score; the first one wins on ties."""
    scores = list(scores)
    if not scores:
        raise EmptyCandidateListError("no candidate scores")
    best = 0
    for i, score in enumerate(scores):
        if score < scores[best]:
            best = i
    return best


def select_safest(candidates: list[str], model: GbtRegressor,
                  provider: EmbeddingProviderConfig) -> dict:
    """Score every candidate prompt and return the safest.

    Returns {"index", "prompt", "scores"}; all scores are kept for audit.
    """
    if not candidates:
        raise EmptyCandidateListError("no candidate prompts")
    scores = [predict_risk(model, embed(provider, c)) for c in candidates]
    index = pick_safest(scores)
    return {"index": index, "prompt": candidates[index], "scores": scores}
