"""Runtime prompt guard: rewrite incoming prompts before generation.

The guard paraphrases each prompt and forwards the safest variant; unlike
the offline selector, the original wording is excluded from the candidates
by default, because returning it verbatim cannot neutralize lexical
triggers. On paraphrase-service failure the guard fails open: the original
prompt is returned with ``guard_degraded`` set so operators can alert on
it, rather than denying all service.

``serve`` exposes ``POST /guard`` and ``GET /healthz`` on a threaded HTTP
server with a hard cap on in-flight requests (503 above the cap). In
``full_proxy`` mode the sanitized prompt is posted to the downstream
generation endpoint and its response body comes back under ``generation``
(502 on downstream failure).
"""
from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import requests

from . import __version__
from .errors import ConfigError, ProviderError
from .risk.embedding import EmbeddingProviderConfig, RemoteEndpoint, embed
from .risk.gbt import GbtRegressor, load_gbt, predict_risk
from .risk.paraphrase import DEFAULT_K, ParaphraseClientConfig, paraphrase
from .risk.selector import pick_safest

log = logging.getLogger("safetune.guard")


@dataclass
class GuardConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8787
    mode: str = "sanitize_only"  # sanitize_only | full_proxy
    downstream_url: str | None = None
    client: ParaphraseClientConfig = field(default_factory=ParaphraseClientConfig)
    provider: EmbeddingProviderConfig | None = None
    risk_model: GbtRegressor | None = None
    k_paraphrases: int = DEFAULT_K
    include_original: bool = False
    request_timeout_ms: int = 15_000
    max_concurrent: int = 8
    log_prompts: bool = False

    def validate(self):
        if self.mode not in ("sanitize_only", "full_proxy"):
            raise ConfigError(f"unknown guard mode {self.mode!r}")
        if self.mode == "full_proxy" and not self.downstream_url:
            raise ConfigError("full_proxy mode requires downstream_url")
        if self.mode == "sanitize_only" and self.downstream_url:
            raise ConfigError("downstream_url is only valid in full_proxy mode")
        if self.max_concurrent < 1:
            raise ConfigError("max_concurrent must be >= 1")


def load_guard_config(path) -> GuardConfig:
    obj = json.loads(open(path, encoding="utf-8").read())
    client_obj = obj.get("client", {})
    client = ParaphraseClientConfig(
        mode=client_obj.get("mode", "stub"),
        remote=RemoteEndpoint(**client_obj["remote"]) if "remote" in client_obj else None,
    )
    provider = None
    if "provider" in obj:
        prov = obj["provider"]
        provider = EmbeddingProviderConfig(
            mode=prov.get("mode", "local_hash"),
            dim=prov.get("dim", 1024),
            seed=prov.get("seed", 0),
            remote=RemoteEndpoint(**prov["remote"]) if "remote" in prov else None,
        )
    risk_model = load_gbt(obj["risk_model"]) if obj.get("risk_model") else None
    config = GuardConfig(
        listen_host=obj.get("listen_host", "127.0.0.1"),
        listen_port=int(obj.get("listen_port", 8787)),
        mode=obj.get("mode", "sanitize_only"),
        downstream_url=obj.get("downstream_url"),
        client=client,
        provider=provider,
        risk_model=risk_model,
        k_paraphrases=int(obj.get("k_paraphrases", DEFAULT_K)),
        include_original=bool(obj.get("include_original", False)),
        request_timeout_ms=int(obj.get("request_timeout_ms", 15_000)),
        max_concurrent=int(obj.get("max_concurrent", 8)),
        log_prompts=bool(obj.get("log_prompts", False)),
    )
    config.validate()
    return config


def guard_prompt(prompt: str, client: ParaphraseClientConfig,
                 risk_model: GbtRegressor | None = None,
                 provider: EmbeddingProviderConfig | None = None,
                 k: int = DEFAULT_K, include_original: bool = False) -> dict:
    """Rewrite one prompt; fail open with guard_degraded on provider failure."""
    if not prompt or not prompt.strip():
        raise ConfigError("prompt is empty")
    try:
        variants = paraphrase(client, prompt, k)
    except ProviderError as exc:
        log.warning("paraphrase provider failed, serving original: %s", exc)
        return {"sanitized_prompt": prompt, "risk_before": None, "risk_after": None,
                "variants_considered": 0, "guard_degraded": True}
    candidates = ([prompt] if include_original else []) + variants
    risk_before = None
    risk_after = None
    if risk_model is not None and provider is not None:
        try:
            risk_before = predict_risk(risk_model, embed(provider, prompt))
            scores = [predict_risk(risk_model, embed(provider, c)) for c in candidates]
        except ProviderError as exc:
            log.warning("risk scoring failed, serving original: %s", exc)
            return {"sanitized_prompt": prompt, "risk_before": None, "risk_after": None,
                    "variants_considered": len(candidates), "guard_degraded": True}
        index = pick_safest(scores)
        risk_after = scores[index]
    else:
        index = 0
    return {
        "sanitized_prompt": candidates[index],
        "risk_before": risk_before,
        "risk_after": risk_after,
        "variants_considered": len(candidates),
        "guard_degraded": False,
    }


def _make_handler(config: GuardConfig, gate: threading.Semaphore):
    class Handler(BaseHTTPRequestHandler):
        server_version = f"safetune-guard/{__version__}"
        protocol_version = "HTTP/1.1"

        def _respond(self, status: int, obj: dict):
            body = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return status

        def log_message(self, fmt, *args):  # silence the default stderr lines
            pass

        def _log_request(self, status: int, started: float, degraded=False, prompt=None):
            entry = {
                "ts": round(time.time(), 3),
                "method": self.command,
                "path": self.path,
                "status": status,
                "ms": round((time.perf_counter() - started) * 1000.0, 2),
                "guard_degraded": degraded,
            }
            if config.log_prompts and prompt is not None:
                entry["prompt"] = prompt
            log.info(json.dumps(entry))

        def do_GET(self):
            started = time.perf_counter()
            if self.path == "/healthz":
                status = self._respond(200, {"status": "ok", "version": __version__,
                                             "mode": config.mode})
            else:
                status = self._respond(404, {"error": "not found"})
            self._log_request(status, started)

        def do_POST(self):
            started = time.perf_counter()
            if self.path != "/guard":
                self._log_request(self._respond(404, {"error": "not found"}), started)
                return
            if not gate.acquire(blocking=False):
                self._log_request(
                    self._respond(503, {"error": "concurrency limit reached"}), started)
                return
            try:
                self._handle_guard(started)
            finally:
                gate.release()

        def _handle_guard(self, started: float):
            try:
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"")
                prompt = payload["prompt"]
                if not isinstance(prompt, str) or not prompt.strip():
                    raise ValueError("prompt must be a non-empty string")
            except (ValueError, KeyError, TypeError) as exc:
                self._log_request(
                    self._respond(400, {"error": f"malformed request: {exc}"}), started)
                return
            result = guard_prompt(
                prompt, config.client, config.risk_model, config.provider,
                k=config.k_paraphrases, include_original=config.include_original)
            if config.mode == "full_proxy":
                try:
                    response = requests.post(
                        config.downstream_url,
                        json={"prompt": result["sanitized_prompt"]},
                        timeout=config.request_timeout_ms / 1000.0)
                    response.raise_for_status()
                except requests.RequestException as exc:
                    self._log_request(
                        self._respond(502, {"error": f"downstream failure: {exc}"}),
                        started, degraded=result["guard_degraded"], prompt=prompt)
                    return
                try:
                    result["generation"] = response.json()
                except ValueError:
                    result["generation"] = response.text
            status = self._respond(200, result)
            self._log_request(status, started, degraded=result["guard_degraded"],
                              prompt=prompt)

    return Handler


def create_server(config: GuardConfig) -> ThreadingHTTPServer:
    config.validate()
    gate = threading.Semaphore(config.max_concurrent)
    handler = _make_handler(config, gate)
    server = ThreadingHTTPServer((config.listen_host, config.listen_port), handler)
    server.daemon_threads = True
    return server


def serve(config: GuardConfig) -> None:
    """Run the guard service until interrupted."""
    server = create_server(config)
    host, port = server.server_address[:2]
    log.info(json.dumps({"event": "listening", "host": host, "port": port,
                         "mode": config.mode}))
    try:
        server.serve_forever()
    finally:
        server.server_close()
