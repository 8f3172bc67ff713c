"""Offline corpus sanitization: structural filter plus prompt replacement.

Stage 1 scores every sample's RTL with the graph classifier and rejects
those at or above the threshold (ties reject; unparseable RTL is routed to
the poisoned set, fail-closed). Stage 2 paraphrases each surviving prompt,
scores the original plus the variants, and keeps the lowest-risk wording;
RTL text is never touched. Samples are never dropped on prompt risk alone
unless the optional risk_reject extension threshold is set.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .corpus import (
    ANN_ORIGINAL_PROMPT, ANN_RISK_SCORE, ANN_TROJAN_LABEL, ANN_TROJAN_PROB,
    Dataset, DatasetMeta, PromptRtlPair,
)
from .errors import ConfigError, ProviderError, ScoreError
from .gin.model import GinModel, predict_proba
from .risk.embedding import EmbeddingProviderConfig, embed
from .risk.gbt import GbtRegressor, predict_risk
from .risk.paraphrase import ParaphraseClientConfig, paraphrase
from .risk.selector import pick_safest
from .util import parallel_map

ANN_TAU = "gnn_tau"
ANN_FILTER_ERROR = "filter_error"


@dataclass
class SanitizeConfig:
    tau: float = 0.5
    k_paraphrases: int = 5
    enable_structural: bool = True
    enable_prompt: bool = True
    risk_reject: float | None = None  # extension: drop prompts at/above this risk
    jobs: int | None = None

    def validate(self):
        if not (0.0 < self.tau < 1.0):
            raise ConfigError(f"tau must be in (0,1), got {self.tau}")
        if self.k_paraphrases < 1:
            raise ConfigError("k_paraphrases must be >= 1")
        if not (self.enable_structural or self.enable_prompt):
            raise ConfigError("at least one sanitization stage must be enabled")
        if self.risk_reject is not None and not (0.0 < self.risk_reject <= 1.0):
            raise ConfigError("risk_reject must be in (0,1]")


@dataclass
class SanitizationReport:
    clean_samples: Dataset
    poisoned_samples: Dataset
    per_sample: list
    config: dict
    timing_ms: float

    def to_json_obj(self) -> dict:
        return {
            "config": self.config,
            "n_input": len(self.clean_samples.samples) + len(self.poisoned_samples.samples),
            "n_clean": len(self.clean_samples.samples),
            "n_poisoned": len(self.poisoned_samples.samples),
            "per_sample": self.per_sample,
            "timing_ms": self.timing_ms,
        }


def _derived_meta(dataset: Dataset) -> DatasetMeta:
    return DatasetMeta(schema_version=dataset.meta.schema_version,
                       source=dataset.meta.source, created=dataset.meta.created)


def structural_filter(dataset: Dataset, model: GinModel, tau: float = 0.5,
                      jobs: int | None = None):
    """Partition by Trojan probability: p >= tau is poisoned.

    Every sample is annotated with its probability, binary label, and the
    threshold used; samples whose RTL fails to parse go to the poisoned set
    with the error recorded (the defender cannot certify what it cannot
    analyze).
    """
    if not (0.0 < tau < 1.0):
        raise ConfigError(f"tau must be in (0,1), got {tau}")

    def score(sample: PromptRtlPair):
        try:
            return predict_proba(model, sample.rtl, sample_id=sample.id), None
        except ScoreError as exc:
            return None, str(exc)

    results = parallel_map(score, dataset.samples, jobs)
    clean, poisoned = [], []
    for sample, (prob, error) in zip(dataset.samples, results):
        out = sample.copy()
        if error is not None:
            out.annotations[ANN_FILTER_ERROR] = error
            out.annotations[ANN_TROJAN_LABEL] = 1
            out.annotations[ANN_TAU] = tau
            poisoned.append(out)
            continue
        out.annotations[ANN_TROJAN_PROB] = prob
        out.annotations[ANN_TROJAN_LABEL] = 1 if prob >= tau else 0
        out.annotations[ANN_TAU] = tau
        (poisoned if prob >= tau else clean).append(out)
    return (Dataset(samples=clean, meta=_derived_meta(dataset)),
            Dataset(samples=poisoned, meta=_derived_meta(dataset)))


def _guard_record(sample: PromptRtlPair) -> dict:
    return {
        "id": sample.id,
        "gnn_trojan_prob": sample.annotations.get(ANN_TROJAN_PROB),
        "gnn_trojan_label": sample.annotations.get(ANN_TROJAN_LABEL),
        "chosen_paraphrase_index": None,
        "risk_before": None,
        "risk_after": None,
        "errors": sample.annotations.get(ANN_FILTER_ERROR),
    }


def _rewrite_prompt(sample: PromptRtlPair, record: dict, risk_model: GbtRegressor,
                    provider: EmbeddingProviderConfig, client: ParaphraseClientConfig,
                    k: int):
    try:
        variants = paraphrase(client, sample.prompt, k)
        candidates = [sample.prompt] + variants
        scores = [predict_risk(risk_model, embed(provider, c)) for c in candidates]
        index = pick_safest(scores)
    except ProviderError as exc:
        record["errors"] = str(exc)
        return
    record["chosen_paraphrase_index"] = index
    record["risk_before"] = scores[0]
    record["risk_after"] = scores[index]
    if index != 0:
        sample.annotations[ANN_ORIGINAL_PROMPT] = sample.prompt
        sample.prompt = candidates[index]
    sample.annotations[ANN_RISK_SCORE] = scores[index]


def sanitize(dataset: Dataset, gin_model: GinModel | None,
             risk_model: GbtRegressor | None,
             provider: EmbeddingProviderConfig | None,
             client: ParaphraseClientConfig | None,
             config: SanitizeConfig | None = None) -> SanitizationReport:
    """Run the enabled stages and assemble the report.

    Structural filtering runs first so paraphrase work is never spent on
    rejected samples. Per-sample provider failures keep the original prompt
    and are recorded; only missing models are fatal.
    """
    config = config or SanitizeConfig()
    config.validate()
    if config.enable_structural and gin_model is None:
        raise ConfigError("structural stage enabled but no graph model given")
    if config.enable_prompt and (risk_model is None or provider is None or client is None):
        raise ConfigError("prompt stage enabled but risk model/provider/client missing")

    started = time.perf_counter()
    if config.enable_structural:
        clean, poisoned = structural_filter(dataset, gin_model, config.tau, config.jobs)
    else:
        clean = Dataset(samples=[s.copy() for s in dataset.samples],
                        meta=_derived_meta(dataset))
        poisoned = Dataset(samples=[], meta=_derived_meta(dataset))

    records = {s.id: _guard_record(s) for s in list(clean) + list(poisoned)}

    if config.enable_prompt:
        def rewrite(sample):
            _rewrite_prompt(sample, records[sample.id], risk_model, provider,
                            client, config.k_paraphrases)

        parallel_map(rewrite, clean.samples, config.jobs)

        if config.risk_reject is not None:
            kept = []
            for sample in clean.samples:
                risk = records[sample.id]["risk_after"]
                if risk is not None and risk >= config.risk_reject:
                    sample.annotations[ANN_FILTER_ERROR] = (
                        f"risk_reject: residual risk {risk:.4f} >= {config.risk_reject}")
                    poisoned.samples.append(sample)
                else:
                    kept.append(sample)
            clean.samples = kept

    per_sample = [records[sample.id] for sample in dataset.samples]
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return SanitizationReport(
        clean_samples=clean,
        poisoned_samples=poisoned,
        per_sample=per_sample,
        config={
            "tau": config.tau,
            "k_paraphrases": config.k_paraphrases,
            "enable_structural": config.enable_structural,
            "enable_prompt": config.enable_prompt,
            "risk_reject": config.risk_reject,
        },
        timing_ms=elapsed_ms,
    )
