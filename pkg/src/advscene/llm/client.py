"""Provider-agnostic chat completion with retries, plus a canned-response
client that makes every higher-level test hermetic."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import requests

from advscene.errors import (
    ConfigError,
    CredentialError,
    RequestTimeoutError,
    TransportError,
)

RETRY_STATUS = (429, 500, 502, 503, 504)


@dataclass(frozen=True)
class ChatConfig:
    endpoint: str = "https://api.example.com/v1/chat/completions"
    model: str = "gemini-2.5-pro"
    api_key_env: str = "ADVSCENE_API_KEY"
    temperature: float = 0.2
    max_tokens: int = 2048
    timeout_s: float = 60.0
    retries: int = 3
    backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ConfigError(f"ChatConfig: timeout {self.timeout_s} <= 0")
        if self.retries < 0:
            raise ConfigError(f"ChatConfig: negative retry budget {self.retries}")


@dataclass
class ChatTranscript:
    """Ordered chat messages: one system message, then user/assistant turns."""

    messages: List[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.messages:
            raise ConfigError("ChatTranscript: empty")
        if self.messages[0]["role"] != "system":
            raise ConfigError("ChatTranscript: first message must be system")
        want = "user"
        for m in self.messages[1:]:
            if m["role"] != want:
                raise ConfigError(f"ChatTranscript: expected {want} turn, got {m['role']}")
            want = "assistant" if want == "user" else "user"

    @classmethod
    def start(cls, system: str, user: str) -> "ChatTranscript":
        return cls([{"role": "system", "content": system}, {"role": "user", "content": user}])

    def extend(self, assistant: str, user: str) -> "ChatTranscript":
        return ChatTranscript(
            [*self.messages, {"role": "assistant", "content": assistant}, {"role": "user", "content": user}]
        )


class HttpChatClient:
    """POSTs the common chat-completions JSON shape; safe to share."""

    def __init__(
        self,
        cfg: ChatConfig,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
        audit_log: Optional[str | Path] = None,
    ):
        self.cfg = cfg
        self._session = session or requests.Session()
        self._sleep = sleep
        self._audit_log = Path(audit_log) if audit_log else None

    def _api_key(self) -> str:
        key = os.environ.get(self.cfg.api_key_env, "")
        if not key:
            raise CredentialError(
                f"chat: environment variable {self.cfg.api_key_env} is unset or empty"
            )
        return key

    def _audit(self, payload: dict, response_text: Optional[str], status: Optional[int]) -> None:
        if self._audit_log is None:
            return
        with self._audit_log.open("a") as fh:
            fh.write(
                json.dumps(
                    {"request": payload, "status": status, "response": response_text},
                    sort_keys=True,
                )
                + "\n"
            )

    def complete(self, transcript: ChatTranscript) -> str:
        key = self._api_key()
        payload = {
            "model": self.cfg.model,
            "messages": transcript.messages,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        }
        delay = self.cfg.backoff_s
        last_error: Optional[str] = None
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                self._sleep(delay)
                delay *= 2.0
            try:
                resp = self._session.post(
                    self.cfg.endpoint,
                    json=payload,
                    headers={"Authorization": f"Bearer {key}"},
                    timeout=self.cfg.timeout_s,
                )
            except requests.Timeout:
                last_error = "timeout"
                continue
            except requests.RequestException as exc:
                last_error = f"transport: {exc}"
                continue
            if resp.status_code in RETRY_STATUS:
                last_error = f"status {resp.status_code}"
                continue
            if resp.status_code in (401, 403):
                self._audit(payload, resp.text, resp.status_code)
                raise CredentialError(f"chat: endpoint rejected credentials ({resp.status_code})")
            if resp.status_code != 200:
                self._audit(payload, resp.text, resp.status_code)
                raise TransportError(f"chat: unexpected status {resp.status_code}")
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError) as exc:
                raise TransportError(f"chat: malformed response body: {exc}") from exc
            self._audit(payload, text, resp.status_code)
            return text
        self._audit(payload, None, None)
        if last_error == "timeout":
            raise RequestTimeoutError(
                f"chat: no answer within {self.cfg.timeout_s}s after {self.cfg.retries} retries"
            )
        raise TransportError(f"chat: retry budget exhausted ({last_error})")


class FixtureChatClient:
    """Replays canned assistant responses in order (hermetic test/CI mode)."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.requests: List[ChatTranscript] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureChatClient":
        data = json.loads(Path(path).read_text())
        if not isinstance(data, list):
            raise ConfigError(f"{path}: fixture file must be a JSON array of responses")
        return cls([str(x) for x in data])

    def complete(self, transcript: ChatTranscript) -> str:
        self.requests.append(transcript)
        if self._cursor >= len(self._responses):
            raise TransportError(
                f"fixture client: exhausted after {len(self._responses)} responses"
            )
        out = self._responses[self._cursor]
        self._cursor += 1
        return out


def complete_chat(cfg: ChatConfig, transcript: ChatTranscript) -> str:
    """One-shot completion against the configured HTTP endpoint."""
    return HttpChatClient(cfg).complete(transcript)
