"""Paraphrase generation: deterministic offline stub or a chat-completion
service client.

The stub first strips lexicon terms (whole-word, case-insensitive); the
stripped text is variant 0 when stripping changed anything, otherwise the
original is. Further variants rotate words through a fixed synonym table,
and the list is padded with variant 0 when fewer than K distinct rewrites
exist, so no variant ever reintroduces a stripped term.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ConfigError, MalformedResponseError, ProviderError
from .embedding import RemoteEndpoint, post_with_retries
from .lexicon import RiskLexicon, default_lexicon

DEFAULT_K = 5

SYNONYMS = {
    "implement": ["build", "construct", "realize"],
    "create": ["design", "produce", "devise"],
    "write": ["author", "compose", "draft"],
    "design": ["architect", "lay out", "plan"],
    "module": ["block", "unit", "component"],
    "circuit": ["logic", "datapath", "network"],
    "signal": ["line", "net", "wire"],
    "output": ["result", "outcome", "response"],
    "input": ["operand", "source", "stimulus"],
    "add": ["include", "attach", "incorporate"],
    "make": ["produce", "form", "assemble"],
    "counter": ["count register", "tally unit", "counting block"],
    "register": ["storage element", "flop stage", "latch bank"],
    "generate": ["produce", "emit", "derive"],
    "small": ["compact", "minimal", "lightweight"],
    "simple": ["basic", "plain", "straightforward"],
}

_INSTRUCTION = (
    "Rewrite the following hardware design request in {k} different ways. "
    "Preserve the functional intent exactly, vary the wording, and answer "
    "with a numbered list only.\n\n{prompt}"
)

_NUMBERED_RE = re.compile(r"^\s*\d+[.)]\s*(.+?)\s*$")


@dataclass
class ParaphraseClientConfig:
    mode: str = "stub"  # stub | remote
    lexicon: RiskLexicon | None = None
    remote: RemoteEndpoint | None = None

    def __post_init__(self):
        if self.mode not in ("stub", "remote"):
            raise ConfigError(f"unknown paraphrase mode {self.mode!r}")
        if self.mode == "remote" and self.remote is None:
            raise ConfigError("remote mode requires a RemoteEndpoint")


def _strip_terms(prompt: str, lexicon: RiskLexicon) -> str:
    text = prompt
    for pattern, _ in lexicon._patterns:
        text = pattern.sub(" ", text)
    return re.sub(r"\s+", " ", text).strip()


def _apply_synonyms(text: str, rotation: int) -> str:
    def replace(match):
        word = match.group(0)
        options = SYNONYMS.get(word.lower())
        if not options:
            return word
        return options[rotation % len(options)]

    return re.sub(r"[A-Za-z]+", replace, text)


def _stub_variants(prompt: str, k: int, lexicon: RiskLexicon) -> list[str]:
    stripped = _strip_terms(prompt, lexicon)
    base = stripped if stripped != prompt.strip() else prompt
    if not base:
        base = "describe the requested hardware module"
    variants = [base]
    rotation = 0
    while len(variants) < k and rotation < 3 * len(SYNONYMS):
        candidate = _apply_synonyms(base, rotation)
        rotation += 1
        if candidate not in variants:
            variants.append(candidate)
    while len(variants) < k:
        variants.append(base)
    return variants[:k]


def _remote_variants(prompt: str, k: int, endpoint: RemoteEndpoint) -> list[str]:
    payload = {
        "model": endpoint.model,
        "messages": [{"role": "user",
                      "content": _INSTRUCTION.format(k=k, prompt=prompt)}],
    }
    body = post_with_retries(endpoint, payload)
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProviderError(f"malformed paraphrase response: {exc}") from exc
    variants = []
    for line in str(content).splitlines():
        match = _NUMBERED_RE.match(line)
        if match:
            variants.append(match.group(1))
    if len(variants) < k:
        raise MalformedResponseError(
            f"expected {k} numbered variants, parsed {len(variants)}")
    return variants[:k]


def paraphrase(client: ParaphraseClientConfig, prompt: str, k: int = DEFAULT_K) -> list[str]:
    """Produce K paraphrase candidates for a prompt."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if client.mode == "stub":
        lexicon = client.lexicon or default_lexicon()
        return _stub_variants(prompt, k, lexicon)
    return _remote_variants(prompt, k, client.remote)
