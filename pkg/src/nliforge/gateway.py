"""Uniform text-completion gateway.

Every generation stage talks to a :class:`Gateway`, which wraps a backend
(remote HTTP service or deterministic mock) with retry, rate-limiting, and
audit-logging behavior. One audit record is appended per *attempt*, so the
audit log length equals total attempts, not logical calls.

The remote wire format is a single HTTP endpoint accepting a JSON body
``{prompt, temperature, max_output_tokens, stop}`` and returning ``{text}``.
The API credential is read from the ``NLIFORGE_API_KEY`` environment
variable and never stored in configuration files.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

API_KEY_ENV = "NLIFORGE_API_KEY"

DEFAULT_MAX_OUTPUT_TOKENS = 512


class GatewayError(Exception):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """Retries exhausted on network-level failures."""


class BackendError(GatewayError):
    """The backend answered but unusably (non-retryable status, bad payload)."""

    def __init__(self, message: str, status: int | None = None, body: str | None = None):
        super().__init__(message)
        self.status = status
        self.body = body


class UnscriptedPromptError(BackendError):
    """The mock backend has no scripted response and no fallback generator."""


class TransientBackendFailure(Exception):
    """Internal marker for retryable failures; never escapes the gateway."""

    def __init__(self, message: str, status: int | None = None, body: str | None = None):
        super().__init__(message)
        self.status = status
        self.body = body


@dataclass(frozen=True)
class CompletionRequest:
    """One text-completion call.

    ``seed`` is honored only by the mock backend, where it makes the
    response a pure function of (prompt, seed).
    """

    prompt: str
    temperature: float = 1.0
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    stop_sequences: tuple[str, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError(f"temperature must be finite and >= 0, got {self.temperature}")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    def to_dict(self) -> dict:
        return {
            "prompt": self.prompt,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "stop": list(self.stop_sequences),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CompletionResponse:
    """Backend text returned verbatim; ``text`` may be empty and callers
    must handle that."""

    text: str
    backend_id: str
    latency: float
    raw: object = None


@dataclass(frozen=True)
class GatewayPolicy:
    """Retry/backoff/rate-limit policy for one gateway."""

    max_retries: int = 3
    backoff: tuple[float, ...] = (0.5, 1.0, 2.0)
    rate_limit: tuple[int, float] | None = (8, 1.0)  # (requests, interval seconds)
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.rate_limit is not None and self.rate_limit[0] <= 0:
            raise ValueError("rate limit must admit at least one request per interval")

    def backoff_for(self, attempt: int) -> float:
        if not self.backoff:
            return 0.0
        return self.backoff[min(attempt, len(self.backoff) - 1)]


@dataclass(frozen=True)
class GenerationRecord:
    """One audited backend attempt."""

    request: dict
    response: dict | None
    error: str | None
    attempt: int
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "request": self.request,
            "response": self.response,
            "error": self.error,
            "attempt": self.attempt,
            "timestamp": self.timestamp,
        }


class RateLimiter:
    """Sliding-window limiter: at most ``max_requests`` admissions per
    ``interval`` seconds. Clock and sleep are injectable for tests."""

    def __init__(
        self,
        max_requests: int,
        interval: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_requests <= 0:
            raise ValueError("max_requests must be positive")
        self.max_requests = max_requests
        self.interval = interval
        self._clock = clock
        self._sleep = sleep
        self._admitted: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._admitted and now - self._admitted[0] >= self.interval:
                    self._admitted.popleft()
                if len(self._admitted) < self.max_requests:
                    self._admitted.append(now)
                    return
                wait = self.interval - (now - self._admitted[0])
            self._sleep(max(wait, 0.0))


class Backend(Protocol):
    backend_id: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


class Gateway:
    """Shareable completion front door: rate limit, retries, audit trail.

    Transient failures (HTTP 429/5xx, network errors) are retried per
    policy. When the budget runs out, a failure that carried an HTTP status
    surfaces as :class:`BackendError` with status and body excerpt, a pure
    network failure as :class:`TransportError`. Non-retryable statuses fail
    immediately as :class:`BackendError`.
    """

    def __init__(
        self,
        backend: Backend,
        policy: GatewayPolicy | None = None,
        audit_path: str | Path | None = None,
        concurrency: int = 4,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.policy = policy or GatewayPolicy()
        self.concurrency = concurrency
        self._clock = clock
        self._sleep = sleep
        self._limiter = (
            RateLimiter(*self.policy.rate_limit, clock=clock, sleep=sleep)
            if self.policy.rate_limit
            else None
        )
        self._audit: list[GenerationRecord] = []
        self._audit_lock = threading.Lock()
        self._audit_path = Path(audit_path) if audit_path else None
        if self._audit_path:
            self._audit_path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def audit_records(self) -> list[GenerationRecord]:
        with self._audit_lock:
            return list(self._audit)

    def _record(self, record: GenerationRecord) -> None:
        with self._audit_lock:
            self._audit.append(record)
            if self._audit_path:
                with open(self._audit_path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        attempt = 0
        while True:
            attempt += 1
            if self._limiter:
                self._limiter.acquire()
            started = self._clock()
            try:
                response = self.backend.complete(request)
            except TransientBackendFailure as failure:
                self._record(
                    GenerationRecord(
                        request=request.to_dict(),
                        response=None,
                        error=str(failure),
                        attempt=attempt,
                        timestamp=time.time(),
                    )
                )
                if attempt > self.policy.max_retries:
                    if failure.status is not None:
                        raise BackendError(
                            f"backend returned {failure.status} after {attempt} attempts: "
                            f"{(failure.body or '')[:200]}",
                            status=failure.status,
                            body=failure.body,
                        ) from failure
                    raise TransportError(
                        f"transport failed after {attempt} attempts: {failure}"
                    ) from failure
                self._sleep(self.policy.backoff_for(attempt - 1))
                continue
            except BackendError as failure:
                self._record(
                    GenerationRecord(
                        request=request.to_dict(),
                        response=None,
                        error=str(failure),
                        attempt=attempt,
                        timestamp=time.time(),
                    )
                )
                raise
            latency = self._clock() - started
            response = CompletionResponse(
                text=response.text,
                backend_id=response.backend_id,
                latency=latency,
                raw=response.raw,
            )
            self._record(
                GenerationRecord(
                    request=request.to_dict(),
                    response={"text": response.text, "backend_id": response.backend_id},
                    error=None,
                    attempt=attempt,
                    timestamp=time.time(),
                )
            )
            return response

    def complete_many(
        self, requests: Sequence[CompletionRequest]
    ) -> list[CompletionResponse | GatewayError]:
        """Run requests concurrently (bounded by ``concurrency``).

        Results keep request order; per-request gateway failures come back
        in place of responses instead of aborting the batch.
        """
        if not requests:
            return []

        def one(req: CompletionRequest) -> CompletionResponse | GatewayError:
            try:
                return self.complete(req)
            except GatewayError as exc:
                return exc

        with ThreadPoolExecutor(max_workers=max(1, self.concurrency)) as pool:
            return list(pool.map(one, requests))


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary parts (not salted like ``hash``)."""
    digest = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "big") >> 1


class MockBackend:
    """Deterministic scripted backend.

    Responses are a pure function of (prompt, request seed): a script maps a
    prompt to a fixed text or to a list indexed by the request seed; prompts
    without a script entry fall through to ``fallback(prompt, rng)``, where
    the RNG is seeded from (backend seed, request seed, prompt). Identical
    runs therefore produce identical corpora end-to-end.
    """

    def __init__(
        self,
        script: Mapping[str, str | Sequence[str]] | None = None,
        fallback: Callable[[str, random.Random], str] | None = None,
        seed: int = 0,
        backend_id: str = "mock",
    ):
        self.script = dict(script or {})
        self.fallback = fallback
        self.seed = seed
        self.backend_id = backend_id

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        entry = self.script.get(request.prompt)
        if entry is not None:
            if isinstance(entry, str):
                text = entry
            else:
                index = request.seed or 0
                text = entry[index % len(entry)]
            return CompletionResponse(text, self.backend_id, 0.0, raw={"source": "script"})
        if self.fallback is not None:
            rng = random.Random(derive_seed(self.seed, request.seed, request.prompt))
            text = self.fallback(request.prompt, rng)
            return CompletionResponse(text, self.backend_id, 0.0, raw={"source": "fallback"})
        raise UnscriptedPromptError(
            f"unscripted prompt (first 80 chars): {request.prompt[:80]!r}"
        )


class HttpBackend:
    """Remote completion endpoint speaking the gateway wire format."""

    RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        backend_id: str | None = None,
        session=None,
    ):
        import requests

        self.endpoint = endpoint
        self.timeout = timeout
        self.backend_id = backend_id or endpoint
        self._session = session or requests.Session()
        self._requests = requests

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        headers = {}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_output_tokens": request.max_output_tokens,
            "stop": list(request.stop_sequences),
        }
        try:
            response = self._session.post(
                self.endpoint, json=body, headers=headers, timeout=self.timeout
            )
        except self._requests.RequestException as exc:
            raise TransientBackendFailure(f"request failed: {exc}") from exc
        if response.status_code in self.RETRYABLE_STATUSES:
            raise TransientBackendFailure(
                f"retryable status {response.status_code}",
                status=response.status_code,
                body=response.text[:500],
            )
        if not 200 <= response.status_code < 300:
            raise BackendError(
                f"backend returned {response.status_code}: {response.text[:200]}",
                status=response.status_code,
                body=response.text[:500],
            )
        try:
            payload = response.json()
        except ValueError:
            raise BackendError(
                "backend response is not JSON", status=response.status_code,
                body=response.text[:500],
            ) from None
        text = payload.get("text")
        if not isinstance(text, str):
            raise BackendError(
                "backend response missing string field 'text'",
                status=response.status_code,
                body=response.text[:500],
            )
        return CompletionResponse(text, self.backend_id, 0.0, raw=payload)
