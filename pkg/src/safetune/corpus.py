"""Prompt-RTL dataset model and JSONL persistence.

A dataset is an ordered list of prompt/RTL pairs plus a small meta record
kept in a sidecar ``<name>.meta.json``. The JSONL encoding is
byte-deterministic: fixed key order, compact separators, LF line endings,
UTF-8. Unknown top-level keys found in third-party files are preserved in
``annotations`` so a sanitize round-trip never loses them.

``ground_truth_label`` exists for evaluation only; no filter in this
package reads it.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, SchemaError

DESIGN_FAMILIES = ("AES", "PIC", "RSA", "UART", "SRAM", "OTHER")
LABELS = ("clean", "poisoned")

# annotation keys written by pipeline stages
ANN_TROJAN_PROB = "gnn_trojan_prob"
ANN_TROJAN_LABEL = "gnn_trojan_label"
ANN_RISK_SCORE = "risk_score"
ANN_ORIGINAL_PROMPT = "original_prompt"

_KNOWN_KEYS = ("id", "prompt", "rtl", "design_family", "ground_truth_label", "annotations")


@dataclass
class PromptRtlPair:
    id: str
    prompt: str
    rtl: str
    design_family: str | None = None
    ground_truth_label: str | None = None
    annotations: dict = field(default_factory=dict)

    def validate(self, line=None):
        if not isinstance(self.id, str) or not self.id:
            raise SchemaError("id must be a non-empty string", line)
        for name in ("prompt", "rtl"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise SchemaError(f"{name} must be a string", line)
            if not value.strip():
                raise SchemaError(f"{name} is empty", line)
        if self.design_family is not None and self.design_family not in DESIGN_FAMILIES:
            raise SchemaError(f"unknown design_family {self.design_family!r}", line)
        if self.ground_truth_label is not None and self.ground_truth_label not in LABELS:
            raise SchemaError(f"unknown ground_truth_label {self.ground_truth_label!r}", line)
        prob = self.annotations.get(ANN_TROJAN_PROB)
        if prob is not None and not (0.0 <= float(prob) <= 1.0):
            raise SchemaError(f"{ANN_TROJAN_PROB} outside [0,1]: {prob}", line)

    def copy(self) -> "PromptRtlPair":
        return PromptRtlPair(
            id=self.id,
            prompt=self.prompt,
            rtl=self.rtl,
            design_family=self.design_family,
            ground_truth_label=self.ground_truth_label,
            annotations=dict(self.annotations),
        )


@dataclass
class DatasetMeta:
    schema_version: str = "1"
    source: str = ""
    created: str = ""


@dataclass
class Dataset:
    samples: list[PromptRtlPair] = field(default_factory=list)
    meta: DatasetMeta = field(default_factory=DatasetMeta)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def validate(self):
        seen = set()
        for i, sample in enumerate(self.samples):
            sample.validate()
            if sample.id in seen:
                raise SchemaError(f"duplicate id {sample.id!r}", i + 1)
            seen.add(sample.id)


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def load_jsonl(path) -> Dataset:
    """Load a JSONL dataset, preserving line order and unknown keys."""
    path = Path(path)
    samples = []
    seen = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(obj, dict):
                raise SchemaError("line is not a JSON object", lineno)
            for req in ("id", "prompt", "rtl"):
                if req not in obj:
                    raise SchemaError(f"missing {req!r}", lineno)
            annotations = dict(obj.get("annotations") or {})
            for key, value in obj.items():
                if key not in _KNOWN_KEYS:
                    annotations[key] = value
            sample = PromptRtlPair(
                id=obj["id"],
                prompt=obj["prompt"],
                rtl=obj["rtl"],
                design_family=obj.get("design_family"),
                ground_truth_label=obj.get("ground_truth_label"),
                annotations=annotations,
            )
            sample.validate(lineno)
            if sample.id in seen:
                raise SchemaError(f"duplicate id {sample.id!r}", lineno)
            seen.add(sample.id)
            samples.append(sample)
    meta = DatasetMeta()
    meta_file = _meta_path(path)
    if meta_file.exists():
        raw = json.loads(meta_file.read_text(encoding="utf-8"))
        meta = DatasetMeta(
            schema_version=raw.get("schema_version", "1"),
            source=raw.get("source", ""),
            created=raw.get("created", ""),
        )
    return Dataset(samples=samples, meta=meta)


def sample_to_obj(sample: PromptRtlPair) -> dict:
    obj = {"id": sample.id, "prompt": sample.prompt, "rtl": sample.rtl}
    if sample.design_family is not None:
        obj["design_family"] = sample.design_family
    if sample.ground_truth_label is not None:
        obj["ground_truth_label"] = sample.ground_truth_label
    if sample.annotations:
        obj["annotations"] = sample.annotations
    return obj


def write_jsonl(dataset: Dataset, path) -> None:
    """Write one compact JSON object per line plus the meta sidecar."""
    dataset.validate()
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for sample in dataset.samples:
            fh.write(json.dumps(sample_to_obj(sample), ensure_ascii=False,
                                separators=(",", ":"), sort_keys=False))
            fh.write("\n")
    meta_obj = {
        "schema_version": dataset.meta.schema_version,
        "source": dataset.meta.source,
        "created": dataset.meta.created,
    }
    _meta_path(path).write_text(
        json.dumps(meta_obj, ensure_ascii=False, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def split(dataset: Dataset, fractions=None, counts=None, seed: int = 42):
    """Partition into (train, finetune, eval) datasets.

    Either ``fractions`` (three floats, positive entries summing to <= 1) or
    ``counts`` (three absolute sizes) selects the partition sizes. The union
    of the three parts is a prefix of a seeded shuffle; with fractions, each
    part gets floor(fraction * N) samples and the remainder of the selected
    prefix goes to train. Deterministic for a fixed seed.
    """
    n = len(dataset.samples)
    if counts is not None:
        sizes = [int(c) for c in counts]
        if any(c < 0 for c in sizes):
            raise ConfigError("counts must be non-negative")
        if sum(sizes) > n:
            raise ConfigError(f"counts sum to {sum(sizes)} but dataset has {n} samples")
    elif fractions is not None:
        fracs = [float(f) for f in fractions]
        if len(fracs) != 3 or any(f < 0 for f in fracs):
            raise ConfigError("fractions must be three non-negative numbers")
        if sum(fracs) > 1.0 + 1e-9:
            raise ConfigError(f"fractions sum to {sum(fracs):.6g} > 1")
        sizes = [int(f * n + 1e-9) for f in fracs]
        total = int(sum(fracs) * n + 1e-9)
        sizes[0] += total - sum(sizes)
    else:
        raise ConfigError("either fractions or counts is required")

    order = list(range(n))
    random.Random(seed).shuffle(order)
    parts = []
    offset = 0
    for size in sizes:
        chosen = sorted(order[offset:offset + size])
        parts.append(Dataset(
            samples=[dataset.samples[i].copy() for i in chosen],
            meta=DatasetMeta(
                schema_version=dataset.meta.schema_version,
                source=dataset.meta.source,
                created=dataset.meta.created,
            ),
        ))
        offset += size
    return tuple(parts)
