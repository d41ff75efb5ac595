"""HTTP client for the auth service.

Wraps the signed-request envelope for one entity identity. The agent, the
website backend, and the harness's delegating user all talk to Auth
through this client; an optional ``on_event`` hook observes each
request/response pair for transcripts and message counters.
"""

from __future__ import annotations

from typing import Any, Callable

import httpx

from agentgate.core import (
    Clock,
    CryptoSpec,
    DEFAULT_CRYPTO_SPEC,
    RandomSource,
    SystemClock,
    SystemRandomSource,
    TrustLevel,
)
from agentgate.authsvc.envelope import sign_request

EventHook = Callable[[str, str, str], None]  # (direction, operation, outcome)


class AuthApiError(Exception):
    def __init__(self, status_code: int, code: str, detail: str) -> None:
        super().__init__(f"{status_code} {code}: {detail}")
        self.status_code = status_code
        self.code = code
        self.detail = detail


def _error_from_response(response: httpx.Response) -> AuthApiError:
    try:
        payload = response.json()
        code = payload.get("error", "unknown")
        detail = payload.get("detail", response.text)
    except ValueError:
        code, detail = "unknown", response.text
    return AuthApiError(response.status_code, code, detail)


class AuthApiClient:
    def __init__(
        self,
        base_url: str,
        entity_name: str,
        distribution_key: bytes,
        *,
        http: httpx.Client | None = None,
        clock: Clock | None = None,
        rng: RandomSource | None = None,
        spec: CryptoSpec = DEFAULT_CRYPTO_SPEC,
        on_event: EventHook | None = None,
    ) -> None:
        self.entity_name = entity_name
        self._key = distribution_key
        self._http = http if http is not None else httpx.Client(base_url=base_url)
        self._owns_http = http is None
        self._clock = clock or SystemClock()
        self._rng = rng or SystemRandomSource()
        self._spec = spec
        self._on_event = on_event

    def close(self) -> None:
        if self._owns_http:
            self._http.close()

    # -- unsigned provisioning ----------------------------------------------

    def register_entity(self, name: str, group: str) -> dict[str, Any]:
        return self._call("POST", "/entities", "register_entity", json={"name": name, "group": group})

    def add_policy(
        self,
        requesting_group: str,
        target_type: str,
        target: str | dict[str, str],
        relative_validity_seconds: float,
        absolute_validity_seconds: float,
    ) -> dict[str, Any]:
        return self._call(
            "POST",
            "/policies",
            "add_policy",
            json={
                "requesting_group": requesting_group,
                "target_type": target_type,
                "target": target,
                "relative_validity_seconds": relative_validity_seconds,
                "absolute_validity_seconds": absolute_validity_seconds,
            },
        )

    def healthz(self) -> dict[str, Any]:
        return self._call("GET", "/healthz", "healthz")

    # -- signed operations ----------------------------------------------------

    def create_delegation(
        self, trust: TrustLevel | str, target_group: str, purpose: str = ""
    ) -> dict[str, Any]:
        trust_name = trust.value if isinstance(trust, TrustLevel) else str(trust)
        payload = {"trust": trust_name, "target_group": target_group, "purpose": purpose}
        return self._call(
            "POST", "/delegations", "create_delegation", json=self._envelope(payload)
        )

    def redeem_session_key(self, key_id: int) -> dict[str, Any]:
        return self._call(
            "POST",
            f"/session-keys/{key_id}/request",
            "redeem_session_key",
            json=self._envelope({"id": key_id}),
        )

    # -- plumbing --------------------------------------------------------------

    def _envelope(self, payload: Any) -> dict[str, str]:
        return sign_request(
            self.entity_name,
            payload,
            self._key,
            clock=self._clock,
            rng=self._rng,
            spec=self._spec,
        ).to_wire()

    def _call(self, method: str, path: str, operation: str, json: Any | None = None) -> dict[str, Any]:
        self._emit("request", operation, "sent")
        response = self._http.request(method, path, json=json)
        if response.status_code >= 400:
            error = _error_from_response(response)
            self._emit("response", operation, f"{error.code}:{response.status_code}")
            raise error
        self._emit("response", operation, f"ok:{response.status_code}")
        return response.json()

    def _emit(self, direction: str, operation: str, outcome: str) -> None:
        if self._on_event is not None:
            self._on_event(direction, operation, outcome)
