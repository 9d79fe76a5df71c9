"""Chat-model adapter: plays the game through an external completion endpoint.

Speaks the standard chat-completion HTTP contract (message list in, text out)
and keeps the full dialogue history, so the remote model sees every prompt
and its own prior replies. Transport failures are retried a bounded number of
times, then surfaced as AgentError so the driver can mark the game
Forfeit(infra). Credentials are passed by reference (an environment variable
name) and never enter transcripts.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import httpx

from .base import AgentError


class ConfigError(ValueError):
    pass


@dataclass
class CompletionClientConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 4096
    timeout: float = 120.0
    api_key_env: Optional[str] = None
    transport_retries: int = 2
    extra: dict[str, Any] = field(default_factory=dict)  # e.g. reasoning effort

    def api_key(self) -> Optional[str]:
        if self.api_key_env is None:
            return None
        value = os.environ.get(self.api_key_env, "")
        if not value:
            raise ConfigError(f"credential variable {self.api_key_env} is empty or unset")
        return value


@dataclass
class CallStats:
    latency_ms: float
    prompt_tokens: Optional[int] = None
    completion_tokens: Optional[int] = None
    transport_retries: int = 0


class ChatCompletionAgent:
    def __init__(self, config: CompletionClientConfig, transport: Optional[httpx.BaseTransport] = None):
        self.name = f"llm:{config.model}"
        self.config = config
        self._api_key = config.api_key()  # fail before any game starts
        self._client = httpx.Client(transport=transport, timeout=config.timeout)
        self.messages: list[dict[str, str]] = []
        self.last_stats: Optional[CallStats] = None

    def reset(self) -> None:
        self.messages = []
        self.last_stats = None

    def close(self) -> None:
        self._client.close()

    def _request_body(self) -> dict:
        body = {
            "model": self.config.model,
            "messages": self.messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        body.update(self.config.extra)
        return body

    def receive(self, prompt: str) -> str:
        self.messages.append({"role": "user", "content": prompt})
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        retries = 0
        started = time.monotonic()
        while True:
            try:
                response = self._client.post(
                    self.config.endpoint, json=self._request_body(), headers=headers
                )
                response.raise_for_status()
                payload = response.json()
                break
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                retries += 1
                if retries > self.config.transport_retries:
                    raise AgentError(f"completion endpoint failed: {exc}") from exc
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise AgentError(f"malformed completion payload: {payload!r}") from exc
        usage = payload.get("usage") or {}
        self.last_stats = CallStats(
            latency_ms=(time.monotonic() - started) * 1000.0,
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
            transport_retries=retries,
        )
        self.messages.append({"role": "assistant", "content": content})
        return content
