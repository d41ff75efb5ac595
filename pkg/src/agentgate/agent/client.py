"""Agent protocol client.

Drives the delegated-access workflow against live services: redeem the
session key id at Auth, prove possession via HMAC over the website's
login nonce, then fetch fields and optionally run the mock purchase. A
pure-fetch run issues exactly 2 + n website requests: challenge fetch,
login submission, and one per field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import httpx

from agentgate.core import (
    Clock,
    RandomSource,
    SystemClock,
    SystemRandomSource,
    TRUST_GROUPS,
    compute_hmac,
)
from agentgate.authclient import AuthApiClient, AuthApiError
from agentgate.agent.decider import (
    ACQUIRE_KEY,
    Action,
    AgentTaskState,
    Decider,
    FETCH_FIELD,
    FINISH,
    LOGIN,
    PURCHASE,
    ScriptedDecider,
)
from agentgate.agent.transcript import (
    CHANNEL_AGENT_AUTH,
    CHANNEL_AGENT_WEBSITE,
    ProtocolTranscript,
    TERMINAL_DENIED,
    TERMINAL_FAILED,
    TERMINAL_SUCCESS,
    TERMINAL_SUCCESS_WITH_DENIALS,
)


@dataclass(frozen=True)
class AgentConfig:
    name: str
    group: str
    distribution_key: bytes
    auth_url: str
    website_url: str

    def __post_init__(self) -> None:
        if self.group not in TRUST_GROUPS:
            raise ValueError(f"{self.group!r} is not an agent trust group")


@dataclass(frozen=True)
class TaskScript:
    session_key_id: int
    fields_to_fetch: tuple[str, ...] = ()
    purchase_item: Optional[str] = None

    def __post_init__(self) -> None:
        if self.purchase_item is not None and not self.fields_to_fetch:
            raise ValueError("a purchase task needs profile fields to work with")


class TaskAborted(Exception):
    def __init__(
        self, terminal_status: str, detail: str, status_code: int | None = None
    ) -> None:
        super().__init__(detail)
        self.terminal_status = terminal_status
        self.status_code = status_code


class AgentClient:
    def __init__(
        self,
        config: AgentConfig,
        *,
        auth_http: httpx.Client | None = None,
        website_http: httpx.Client | None = None,
        clock: Clock | None = None,
        rng: RandomSource | None = None,
        decider: Decider | None = None,
    ) -> None:
        self.config = config
        self.clock = clock or SystemClock()
        self.rng = rng or SystemRandomSource()
        self.decider = decider or ScriptedDecider()
        self._transcript: ProtocolTranscript | None = None
        self._auth = AuthApiClient(
            config.auth_url,
            config.name,
            config.distribution_key,
            http=auth_http,
            clock=self.clock,
            rng=self.rng,
            on_event=self._auth_event,
        )
        self._website = (
            website_http if website_http is not None else httpx.Client(base_url=config.website_url)
        )

    # -- protocol steps -------------------------------------------------------

    def acquire_key(self, session_key_id: int) -> bytes:
        """Redeem the key id at Auth; key material stays in memory only."""
        issue = self._auth.redeem_session_key(session_key_id)
        return bytes.fromhex(issue["key"])

    def login(self, key: bytes, session_key_id: int) -> str:
        challenge = self._website_call("GET", "/login/challenge", "load_login_page")
        if challenge.status_code != 200:
            raise TaskAborted(
                TERMINAL_FAILED, "could not load login challenge", challenge.status_code
            )
        body = challenge.json()
        tag = compute_hmac(key, body["nonce"].encode("ascii"))
        response = self._website_call(
            "POST",
            "/login",
            "submit_login",
            json={
                "challenge_id": body["challenge_id"],
                "session_key_id": session_key_id,
                "hmac_hex": tag.hex(),
            },
        )
        if response.status_code != 200:
            raise TaskAborted(
                TERMINAL_FAILED, f"login rejected ({response.status_code})", response.status_code
            )
        return response.json()["session_token"]

    def run_task(self, script: TaskScript) -> ProtocolTranscript:
        transcript = ProtocolTranscript(agent=self.config.name, agent_group=self.config.group)
        transcript.started_at = self.clock.now()
        self._transcript = transcript
        state = AgentTaskState(
            fields_to_fetch=tuple(script.fields_to_fetch),
            purchase_item=script.purchase_item,
        )
        key: bytes | None = None
        token: str | None = None
        try:
            while True:
                action = self.decider.next_action(state)
                if action.kind == FINISH:
                    break
                if action.kind == ACQUIRE_KEY:
                    try:
                        key = self.acquire_key(script.session_key_id)
                    except AuthApiError as exc:
                        raise TaskAborted(
                            TERMINAL_DENIED, f"auth refused key ({exc.code})"
                        ) from exc
                    state.key_acquired = True
                elif action.kind == LOGIN:
                    assert key is not None
                    token = self.login(key, script.session_key_id)
                    state.logged_in = True
                elif action.kind == FETCH_FIELD:
                    assert token is not None and action.field_name is not None
                    self._fetch_field(transcript, state, token, action.field_name)
                elif action.kind == PURCHASE:
                    assert token is not None and action.item is not None
                    self._purchase(transcript, state, token, action.item)
                else:  # pragma: no cover - decider contract violation
                    raise TaskAborted(TERMINAL_FAILED, f"unknown action {action.kind}")
            transcript.terminal_status = (
                TERMINAL_SUCCESS_WITH_DENIALS
                if state.denied_fields or transcript.purchase_outcome == "denied"
                else TERMINAL_SUCCESS
            )
        except TaskAborted as abort:
            transcript.terminal_status = abort.terminal_status
        finally:
            transcript.finished_at = self.clock.now()
            transcript.denied_fields = list(state.denied_fields)
            self._transcript = None
        return transcript

    def close(self) -> None:
        self._auth.close()

    # -- single task steps ------------------------------------------------------

    def _fetch_field(
        self,
        transcript: ProtocolTranscript,
        state: AgentTaskState,
        token: str,
        field_name: str,
    ) -> None:
        response = self._website_call(
            "GET",
            f"/api/profile/{field_name}",
            "fetch_field",
            headers={"Authorization": f"Bearer {token}"},
        )
        state.next_field_index += 1
        if response.status_code == 200:
            transcript.fields_fetched.append(field_name)
        elif response.status_code == 403:
            state.denied_fields.append(field_name)  # move on, never retry
        else:
            raise TaskAborted(
                TERMINAL_FAILED,
                f"field fetch failed ({response.status_code})",
                response.status_code,
            )

    def _purchase(
        self,
        transcript: ProtocolTranscript,
        state: AgentTaskState,
        token: str,
        item: str,
    ) -> None:
        response = self._website_call(
            "POST",
            "/api/purchase",
            "purchase",
            json={"item": item},
            headers={"Authorization": f"Bearer {token}"},
        )
        state.purchase_attempted = True
        if response.status_code == 201:
            transcript.purchase_outcome = "done"
        elif response.status_code == 403:
            transcript.purchase_outcome = "denied"
        else:
            raise TaskAborted(
                TERMINAL_FAILED, f"purchase failed ({response.status_code})", response.status_code
            )

    # -- wire plumbing -------------------------------------------------------------

    def _website_call(
        self, method: str, path: str, operation: str, **kwargs: Any
    ) -> httpx.Response:
        self._record(CHANNEL_AGENT_WEBSITE, "request", operation, "sent")
        response = self._website.request(method, path, **kwargs)
        outcome = f"{'ok' if response.status_code < 400 else 'denied'}:{response.status_code}"
        self._record(CHANNEL_AGENT_WEBSITE, "response", operation, outcome)
        return response

    def _auth_event(self, direction: str, operation: str, outcome: str) -> None:
        self._record(CHANNEL_AGENT_AUTH, direction, operation, outcome)

    def _record(self, channel: str, direction: str, operation: str, outcome: str) -> None:
        if self._transcript is not None:
            self._transcript.record(channel, direction, operation, self.clock.now(), outcome)
