"""Chat-completion backends: a scripted fixture backend and a remote client.

The remote backend speaks the common chat-completions shape over HTTPS
with bearer auth; endpoint, model, key, and temperature come from
environment variables so any compatible provider works. The scripted
backend replays canned completions keyed by the SHA-256 of the query
text, which makes whole-pipeline runs deterministic.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional

import httpx

ENV_ENDPOINT = "EOAGENT_LLM_ENDPOINT"
ENV_MODEL = "EOAGENT_LLM_MODEL"
ENV_API_KEY = "EOAGENT_LLM_API_KEY"
ENV_TEMPERATURE = "EOAGENT_LLM_TEMPERATURE"


class BackendUnavailable(Exception):
    pass


class EmptyCompletion(Exception):
    pass


def query_digest(query: str) -> str:
    return hashlib.sha256(query.encode()).hexdigest()


class ScriptedBackend:
    """Replays canned completions; total over its fixture set."""

    def __init__(self, completions: dict[str, str]):
        self.completions = dict(completions)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls(json.loads(Path(path).read_text()))

    @classmethod
    def from_queries(cls, by_query: dict[str, str]) -> "ScriptedBackend":
        return cls({query_digest(q): text for q, text in by_query.items()})

    def complete(self, bundle, feedback: Optional[list[str]] = None) -> str:
        digest = query_digest(bundle.user_query)
        if digest not in self.completions:
            raise BackendUnavailable(
                f"no scripted completion for query digest {digest[:12]}..."
            )
        return self.completions[digest]


class RemoteBackend:
    """POSTs to a chat-completions endpoint; see README for the wire shape."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str = "",
        temperature: float = 0.0,
        client: Optional[httpx.Client] = None,
        timeout_s: float = 60.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.temperature = temperature
        self._client = client or httpx.Client(timeout=timeout_s)

    @classmethod
    def from_env(cls, client: Optional[httpx.Client] = None) -> "RemoteBackend":
        endpoint = os.environ.get(ENV_ENDPOINT)
        model = os.environ.get(ENV_MODEL)
        if not endpoint or not model:
            raise BackendUnavailable(
                f"{ENV_ENDPOINT} and {ENV_MODEL} must be set for the remote backend"
            )
        return cls(
            endpoint=endpoint,
            model=model,
            api_key=os.environ.get(ENV_API_KEY, ""),
            temperature=float(os.environ.get(ENV_TEMPERATURE, "0") or 0),
            client=client,
        )

    def _messages(self, bundle, feedback: Optional[list[str]]) -> list[dict]:
        messages = [
            {"role": "system", "content": bundle.system_text + "\n\n" + bundle.catalog_text},
            {"role": "user", "content": bundle.user_message()},
        ]
        if feedback:
            messages.append(
                {
                    "role": "user",
                    "content": "The previous program failed validation:\n"
                    + "\n".join(feedback)
                    + "\nRespond with a corrected program, code only.",
                }
            )
        return messages

    def complete(self, bundle, feedback: Optional[list[str]] = None) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": self._messages(bundle, feedback),
        }
        try:
            response = self._client.post(
                self.endpoint + "/chat/completions", json=payload, headers=headers
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"chat-completion request failed: {exc}") from exc
