"""Demo deployment fixture: one user, one website, three agents.

``provision_fixture`` registers the entities, installs the three
delegation policies (one per trust level) and the default scope map, and
is idempotent: reruns skip entities whose credentials are already stored
and re-upsert policies and scopes in place.
"""

from __future__ import annotations

from typing import Any

import httpx

from agentgate.core import TrustLevel
from agentgate.authclient import AuthApiError
from agentgate.website.service import DEFAULT_SCOPE_MAP, UserProfile
from agentgate.harness.environment import HarnessEnv, ProvisionError

USER_NAME = "userAlice"
WEBSITE_NAME = "myWebsite"
AGENTS = {
    "Business": TrustLevel.HIGH,
    "Personal": TrustLevel.MEDIUM,
    "Casual": TrustLevel.LOW,
}

FIXTURE_ENTITIES: list[tuple[str, str]] = [
    (USER_NAME, "Users"),
    (WEBSITE_NAME, "Websites"),
    *[(name, level.group_name) for name, level in AGENTS.items()],
]

# (relative validity, absolute validity) in seconds per trust level
DEFAULT_POLICY_VALIDITIES = {
    TrustLevel.HIGH: (3600.0, 86400.0),
    TrustLevel.MEDIUM: (1800.0, 43200.0),
    TrustLevel.LOW: (600.0, 21600.0),
}

DEFAULT_PROFILE = UserProfile(
    user=USER_NAME,
    email="alice@example.com",
    phone="+1-480-555-0117",
    address="428 Palm Walk, Tempe AZ 85281",
    card="**** **** **** 4242",
)

HUMAN_USERS = {"alice": "agentgate-demo"}
DEFAULT_HUMAN = ("alice", "agentgate-demo")

ALLOWED_FIELDS_BY_TRUST = {
    level: sorted(DEFAULT_SCOPE_MAP[level.group_name][0]) for level in TrustLevel
}


def _check_reachable(client: httpx.Client, url_label: str) -> None:
    try:
        response = client.get("/healthz")
    except httpx.HTTPError as exc:
        raise ProvisionError(f"{url_label} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise ProvisionError(f"{url_label} unhealthy: HTTP {response.status_code}")


def install_delegation_policy(
    env: HarnessEnv, trust: TrustLevel, relative_validity: float, absolute_validity: float
) -> int:
    response = env.auth_http.post(
        "/policies",
        json={
            "requesting_group": "Users",
            "target_type": "Delegation",
            "target": {"delegatee_group": trust.group_name, "target_group": "Websites"},
            "relative_validity_seconds": relative_validity,
            "absolute_validity_seconds": absolute_validity,
        },
    )
    if response.status_code != 201:
        raise ProvisionError(f"policy install failed: {response.text}")
    return response.json()["policy_id"]


def provision_fixture(env: HarnessEnv, skip_website: bool = False) -> dict[str, Any]:
    """Install the fixture. ``skip_website`` bootstraps entities and policies
    before the website is up (it needs its distribution key to start)."""
    _check_reachable(env.auth_http, env.auth_url)
    if not skip_website:
        _check_reachable(env.website_http, env.website_url)

    registered: list[str] = []
    for name, group in FIXTURE_ENTITIES:
        if name in env.credentials:
            continue
        response = env.auth_http.post("/entities", json={"name": name, "group": group})
        if response.status_code == 201:
            env.credentials[name] = bytes.fromhex(response.json()["distribution_key"])
            registered.append(name)
        elif response.status_code == 409:
            raise ProvisionError(
                f"{name} already registered at {env.auth_url} but no stored "
                "credential; pass the state file from the original provision run"
            )
        else:
            raise ProvisionError(f"registering {name} failed: {response.text}")

    policy_ids = {
        trust.value: install_delegation_policy(env, trust, rel, abs_)
        for trust, (rel, abs_) in DEFAULT_POLICY_VALIDITIES.items()
    }

    scopes: dict[str, Any] = {}
    if skip_website:
        return {
            "entities": {name: group for name, group in FIXTURE_ENTITIES},
            "newly_registered": registered,
            "policies": policy_ids,
            "scopes": scopes,
        }
    for group, (fields, may_purchase) in DEFAULT_SCOPE_MAP.items():
        response = env.human_request(
            "PUT",
            f"/api/scopes/{group}",
            json={"allowed_fields": sorted(fields), "may_purchase": may_purchase},
        )
        if response.status_code != 204:
            raise ProvisionError(
                f"scope install for {group} failed at {env.website_url}: {response.text}"
            )
        scopes[group] = {"allowed_fields": sorted(fields), "may_purchase": may_purchase}

    return {
        "entities": {name: group for name, group in FIXTURE_ENTITIES},
        "newly_registered": registered,
        "policies": policy_ids,
        "scopes": scopes,
    }
