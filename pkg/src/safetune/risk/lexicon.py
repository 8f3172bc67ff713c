"""Lexical risk indicators: term weights plus a wide-constant bonus.

The weak label is r = min(1, sum(weight * whole-word count) + bonus * m)
where m counts hex/binary literals with at least the configured number of
digits. Bag-of-words, so word order never matters.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError

# 0xDEADBEEF / 0b1010 / 32'hDEAD_BEEF / 8'b1111_0000 styles
_LITERAL_RES = (
    re.compile(r"\b0x([0-9a-fA-F_]+)"),
    re.compile(r"\b0b([01_]+)"),
    re.compile(r"\b\d*'[sS]?[hH]([0-9a-fA-F_]+)"),
    re.compile(r"\b\d*'[sS]?[bB]([01_]+)"),
)


@dataclass
class RiskLexicon:
    entries: list = field(default_factory=list)  # (term, weight) pairs
    magic_constant_bonus: float = 0.2
    magic_constant_min_hex_digits: int = 8

    def __post_init__(self):
        terms = [t for t, _ in self.entries]
        if len(set(terms)) != len(terms):
            raise ConfigError("lexicon terms must be unique")
        if any(w <= 0 for _, w in self.entries):
            raise ConfigError("lexicon weights must be positive")
        self._patterns = [
            (re.compile(rf"\b{re.escape(term)}\b", re.IGNORECASE), weight)
            for term, weight in self.entries
        ]

    def terms(self) -> list[str]:
        return [t for t, _ in self.entries]


def default_lexicon() -> RiskLexicon:
    raw = resources.files("safetune.data").joinpath("default_lexicon.json").read_text()
    return _from_obj(json.loads(raw))


def load_lexicon(path) -> RiskLexicon:
    return _from_obj(json.loads(Path(path).read_text(encoding="utf-8")))


def _from_obj(obj: dict) -> RiskLexicon:
    entries = [(e["term"].lower(), float(e["weight"])) for e in obj["entries"]]
    return RiskLexicon(
        entries=entries,
        magic_constant_bonus=float(obj.get("magic_constant_bonus", 0.2)),
        magic_constant_min_hex_digits=int(obj.get("magic_constant_min_hex_digits", 8)),
    )


def count_magic_constants(text: str, min_digits: int) -> int:
    count = 0
    for pattern in _LITERAL_RES:
        for match in pattern.finditer(text):
            digits = match.group(1).replace("_", "")
            if len(digits) >= min_digits:
                count += 1
    return count


def lexicon_hits(prompt: str, lexicon: RiskLexicon) -> list[str]:
    """Terms with at least one whole-word occurrence, in lexicon order."""
    return [term for (pattern, _), (term, _) in zip(lexicon._patterns, lexicon.entries)
            if pattern.search(prompt)]


def heuristic_risk_label(prompt: str, lexicon: RiskLexicon | None = None) -> float:
    lexicon = lexicon or default_lexicon()
    total = 0.0
    for pattern, weight in lexicon._patterns:
        total += weight * len(pattern.findall(prompt))
    total += lexicon.magic_constant_bonus * count_magic_constants(
        prompt, lexicon.magic_constant_min_hex_digits)
    return min(1.0, total)
