"""In-process deployment of the full stack for deterministic evaluation.

Builds the auth service and website as ASGI apps driven through in-process
HTTP clients, sharing one manual clock and one seeded randomness source,
so scenario outcomes and reports are reproducible bit for bit.
"""

from __future__ import annotations

from fastapi.testclient import TestClient

from agentgate.core import ManualClock, SeededRandomSource
from agentgate.authclient import AuthApiClient
from agentgate.authsvc.api import create_app as create_auth_app
from agentgate.authsvc.service import AuthService
from agentgate.website.api import create_app as create_website_app
from agentgate.website.service import WebsiteService
from agentgate.harness.environment import HarnessEnv
from agentgate.harness.fixture import (
    DEFAULT_HUMAN,
    DEFAULT_PROFILE,
    HUMAN_USERS,
    USER_NAME,
    WEBSITE_NAME,
)


def build_embedded_env(
    seed: int = 42,
    *,
    clock: ManualClock | None = None,
    event_log_path: str | None = None,
) -> HarnessEnv:
    clock = clock or ManualClock()
    rng = SeededRandomSource(seed)

    auth = AuthService(clock=clock, rng=rng, event_log_path=event_log_path)
    auth_http = TestClient(create_auth_app(auth))

    credentials = {
        WEBSITE_NAME: auth.register_entity(WEBSITE_NAME, "Websites").distribution_key,
        USER_NAME: auth.register_entity(USER_NAME, "Users").distribution_key,
    }

    def auth_client(name: str) -> AuthApiClient:
        return AuthApiClient(
            "http://auth.internal",
            name,
            credentials[name],
            http=auth_http,
            clock=clock,
            rng=rng,
        )

    website = WebsiteService(
        auth_client=auth_client(WEBSITE_NAME),
        profile=DEFAULT_PROFILE,
        clock=clock,
        rng=rng,
    )
    website_app = create_website_app(
        website, human_users=HUMAN_USERS, delegator=auth_client(USER_NAME)
    )
    website_http = TestClient(website_app)

    return HarnessEnv(
        auth_http=auth_http,
        website_http=website_http,
        auth_url="http://auth.internal",
        website_url="http://website.internal",
        credentials=credentials,
        human=DEFAULT_HUMAN,
        clock=clock,
        rng=rng,
        manual_clock=clock,
        auth_service=auth,
        website_service=website,
    )
