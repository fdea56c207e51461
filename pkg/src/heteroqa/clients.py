"""HTTP clients for the three external model endpoints.

All three speak JSON over POST:

* intent model:  request {"question": str}            reply {"si": str}
* scorer:        request {"query": str, "passage": str} reply {"score": float}
* generator:     request {"prompt": str, "max_tokens": int} reply {"text": str}

Endpoints come from the config file; the environment variables
``QUASAR_GENERATOR_URL``, ``QUASAR_SCORER_URL_1`` and ``QUASAR_SCORER_URL_2``
override them. Timeouts are configured in milliseconds. Network failures
raise :class:`TransportError`, which callers may retry.
"""

from __future__ import annotations

import requests


class TransportError(Exception):
    """A retriable wire failure, carrying the endpoint identity."""

    def __init__(self, endpoint: str, cause: Exception | str):
        super().__init__(f"endpoint {endpoint}: {cause}")
        self.endpoint = endpoint


class _JsonEndpoint:
    def __init__(self, url: str, timeout_ms: int = 10_000, session: requests.Session | None = None):
        if not url:
            raise ValueError("endpoint url must be non-empty")
        self.url = url
        self.timeout = timeout_ms / 1000.0
        self._session = session or requests.Session()

    def post(self, payload: dict) -> dict:
        try:
            response = self._session.post(self.url, json=payload, timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
        except requests.RequestException as exc:
            raise TransportError(self.url, exc) from exc
        except ValueError as exc:
            raise TransportError(self.url, f"non-JSON reply: {exc}") from exc
        if not isinstance(body, dict):
            raise TransportError(self.url, "reply is not a JSON object")
        return body


class HttpSiModelClient:
    """Intent model endpoint (see :class:`heteroqa.qu.SiModelClient`)."""

    def __init__(self, url: str, timeout_ms: int = 10_000):
        self._endpoint = _JsonEndpoint(url, timeout_ms)

    def generate_si(self, question: str) -> str:
        body = self._endpoint.post({"question": question})
        return str(body.get("si", ""))


class HttpCeClient:
    """Cross-encoder scorer endpoint (see :class:`heteroqa.rerank.CeClient`)."""

    def __init__(self, url: str, timeout_ms: int = 10_000):
        self._endpoint = _JsonEndpoint(url, timeout_ms)

    def score(self, query: str, passage: str) -> float:
        body = self._endpoint.post({"query": query, "passage": passage})
        try:
            return float(body["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(self._endpoint.url, f"bad score reply: {exc}") from exc


class HttpGeneratorClient:
    """Answer generator endpoint (see :class:`heteroqa.answer.GeneratorClient`)."""

    def __init__(self, url: str, timeout_ms: int = 30_000):
        self._endpoint = _JsonEndpoint(url, timeout_ms)

    def generate(self, prompt: str, max_tokens: int) -> str:
        body = self._endpoint.post({"prompt": prompt, "max_tokens": max_tokens})
        return str(body.get("text", ""))
