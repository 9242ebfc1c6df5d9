"""Single entry point for text generation with retries and rate limiting."""
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from ginger.http_client import (
    JSONService,
    ProviderRejected,
    TransientProviderError,
)
from ginger.llm.prompts import TemplateId, get_template, render_prompt
from ginger.model import PipelineError

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

DEFAULT_MAX_TOKENS: int = 512


@dataclass
class ProviderUnavailable(PipelineError):
    """Provider kept failing after all retries."""


@dataclass
class EmptyCompletion(PipelineError):
    """Provider returned only whitespace."""


@dataclass(frozen=True)
class CompletionRequest:
    """Template with placeholder values and decoding parameters."""

    template_id: TemplateId
    bindings: dict[str, str] = field(hash=False)
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0
    rewrite_count: Optional[int] = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"Negative temperature {self.temperature}.")
        extra: set[str] = set(self.bindings) - get_template(
            self.template_id
        ).placeholders()
        if extra:
            raise ValueError(f"Unexpected bindings {sorted(extra)}.")

    def render(self) -> tuple[str, str]:
        """System and user texts."""
        return render_prompt(
            self.template_id, self.bindings, self.rewrite_count
        )


@dataclass(frozen=True)
class ProviderPolicy:
    """Retry and rate limit policy shared by all callers of a provider."""

    max_retries: int = 3
    backoff_base: float = 0.5  # Seconds.
    rate_limit: float = 5.0  # Requests per second.

    def __post_init__(self) -> None:
        if self.rate_limit <= 0:
            raise ValueError("Rate limit should be positive.")
        if self.max_retries < 0:
            raise ValueError("Number of retries should not be negative.")


class CompletionProvider(Protocol):
    """Text generation backend."""

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        """
        Generate text.

        :raises TransientProviderError: if repeating may help
        :raises ProviderRejected: if it may not
        """


class RateLimiter:
    """
    Spaces request starts at least `1 / rate` seconds apart.

    Each caller reserves the next free slot under the lock and sleeps outside
    of it.
    """

    def __init__(
        self,
        rate: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.interval: float = 1.0 / rate
        self.clock: Callable[[], float] = clock
        self.sleep: Callable[[float], None] = sleep
        self._lock: threading.Lock = threading.Lock()
        self._next_slot: float = float("-inf")

    def acquire(self) -> float:
        """Wait for a slot and return its time."""
        with self._lock:
            now: float = self.clock()
            slot: float = max(now, self._next_slot)
            self._next_slot = slot + self.interval
        if slot > now:
            self.sleep(slot - now)
        return slot


class LLMGateway:
    """Renders prompts and calls the provider under the policy."""

    def __init__(
        self,
        provider: CompletionProvider,
        policy: ProviderPolicy = ProviderPolicy(),
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.provider: CompletionProvider = provider
        self.policy: ProviderPolicy = policy
        self.sleep: Callable[[float], None] = sleep
        self.rate_limiter: RateLimiter = RateLimiter(
            policy.rate_limit, sleep=sleep
        )

    def complete(self, request: CompletionRequest) -> str:
        """
        Get completion for the request.

        Transient failures are retried up to `max_retries` times with
        exponential backoff.

        :raises ProviderUnavailable: if all attempts failed
        :raises ProviderRejected: on a non-retryable failure
        """
        system_text, user_text = request.render()
        attempts: int = self.policy.max_retries + 1
        last_error: Optional[TransientProviderError] = None

        for attempt in range(attempts):
            if attempt > 0:
                delay: float = self.policy.backoff_base * 2 ** (attempt - 1)
                logging.warning(
                    f"{request.template_id.value}: {last_error}; retrying in "
                    f"{delay:.2f} s (attempt {attempt + 1}/{attempts})."
                )
                self.sleep(delay)
            self.rate_limiter.acquire()
            try:
                return self.provider.complete(request, system_text, user_text)
            except TransientProviderError as error:
                last_error = error

        raise ProviderUnavailable(
            f"Provider failed {attempts} times for "
            f"{request.template_id.value}: {last_error}"
        )

    def complete_text(self, request: CompletionRequest) -> str:
        """Same as `complete`, but whitespace-only completions are errors."""
        text: str = self.complete(request)
        if not text.strip():
            raise EmptyCompletion(
                f"Empty completion for {request.template_id.value}."
            )
        return text.strip()


class HTTPProvider:
    """
    Provider behind a JSON endpoint.

    Request fields: `system`, `user`, `max_tokens`, `temperature`; response
    field: `text`.
    """

    def __init__(self, service: JSONService) -> None:
        self.service: JSONService = service

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        content = self.service.post(
            {
                "system": system_text,
                "user": user_text,
                "max_tokens": request.max_tokens,
                "temperature": request.temperature,
            }
        )
        if not isinstance(content.get("text"), str):
            raise ProviderRejected("Response has no `text` field.")
        return content["text"]
