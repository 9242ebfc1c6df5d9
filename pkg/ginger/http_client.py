"""JSON requests to generation and embedding services."""
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Optional

import urllib3

from ginger.model import PipelineError

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

TIMEOUT: float = 120.0
RETRYABLE_STATUSES: set[int] = {408, 425, 429, 500, 502, 503, 504}


@dataclass
class TransientProviderError(PipelineError):
    """Failure that may go away if the request is repeated."""


@dataclass
class ProviderRejected(PipelineError):
    """Service refused the request; repeating it will not help."""


class JSONService:
    """HTTP endpoint accepting and returning JSON objects."""

    def __init__(
        self, address: str, api_key_variable: Optional[str] = None
    ) -> None:
        self.address: str = address
        self.pool_manager: urllib3.PoolManager = urllib3.PoolManager(
            retries=False, timeout=urllib3.Timeout(total=TIMEOUT)
        )
        self.headers: dict[str, str] = {"Content-Type": "application/json"}
        if api_key_variable and (api_key := os.environ.get(api_key_variable)):
            self.headers["Authorization"] = f"Bearer {api_key}"
        elif api_key_variable:
            logging.warning(
                f"Environment variable {api_key_variable} is not set, sending "
                f"requests without API key."
            )

    def post(self, structure: dict[str, Any]) -> dict[str, Any]:
        """
        Send JSON object and get JSON object back.

        :param structure: request body
        :raises TransientProviderError: on network failure, time out, rate
            limiting, or server error
        :raises ProviderRejected: on any other non-success response
        """
        logging.debug(f"Posting to {self.address}...")
        try:
            response = self.pool_manager.request(
                "POST",
                self.address,
                body=json.dumps(structure).encode("utf-8"),
                headers=self.headers,
            )
        except urllib3.exceptions.HTTPError as error:
            raise TransientProviderError(
                f"Cannot reach {self.address}: {error}."
            )

        if response.status in RETRYABLE_STATUSES:
            raise TransientProviderError(
                f"Service {self.address} answered {response.status}."
            )
        if response.status >= 400:
            raise ProviderRejected(
                f"Service {self.address} rejected request with "
                f"{response.status}: {response.data[:200]!r}."
            )
        try:
            content: Any = json.loads(response.data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise ProviderRejected(f"Service {self.address} sent invalid JSON.")
        if not isinstance(content, dict):
            raise ProviderRejected(f"Service {self.address} sent non-object.")
        return content
