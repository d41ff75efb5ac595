"""Execution environment the harness drives scenarios against.

Wraps either an in-process embedded stack (deterministic clock, seeded
randomness) or externally running services reached over real HTTP. All
scenario code talks only to this surface.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import httpx

from agentgate.core import (
    Clock,
    ManualClock,
    RandomSource,
    SystemClock,
    SystemRandomSource,
)
from agentgate.authclient import AuthApiClient
from agentgate.authsvc.service import AuthService
from agentgate.website.service import WebsiteService
from agentgate.agent.client import AgentClient, AgentConfig


class ProvisionError(Exception):
    pass


@dataclass
class HarnessEnv:
    auth_http: httpx.Client
    website_http: httpx.Client
    auth_url: str
    website_url: str
    credentials: dict[str, bytes]
    human: tuple[str, str]
    clock: Clock = field(default_factory=SystemClock)
    rng: RandomSource = field(default_factory=SystemRandomSource)
    manual_clock: ManualClock | None = None
    auth_service: AuthService | None = None
    website_service: WebsiteService | None = None

    def auth_client_for(self, name: str) -> AuthApiClient:
        try:
            key = self.credentials[name]
        except KeyError:
            raise ProvisionError(f"no stored distribution key for {name!r}; provision first")
        return AuthApiClient(
            self.auth_url, name, key, http=self.auth_http, clock=self.clock, rng=self.rng
        )

    def user_client(self) -> AuthApiClient:
        return self.auth_client_for("userAlice")

    def agent(self, name: str, group: str) -> AgentClient:
        config = AgentConfig(
            name=name,
            group=group,
            distribution_key=self.credentials[name],
            auth_url=self.auth_url,
            website_url=self.website_url,
        )
        return AgentClient(
            config,
            auth_http=self.auth_http,
            website_http=self.website_http,
            clock=self.clock,
            rng=self.rng,
        )

    def human_request(self, method: str, path: str, **kwargs) -> httpx.Response:
        return self.website_http.request(method, path, auth=self.human, **kwargs)

    def website_stats(self) -> dict:
        return self.human_request("GET", "/api/stats").json()

    def elapse(self, seconds: float) -> None:
        """Advance the injected clock, or wait it out in real time."""
        if self.manual_clock is not None:
            self.manual_clock.advance(seconds)
        else:
            time.sleep(seconds + 0.05)
