"""Website HTTP surface: status codes, bearer sessions, human endpoints."""

import pytest
from fastapi.testclient import TestClient

from agentgate.core import ManualClock, SeededRandomSource, TrustLevel, compute_hmac
from agentgate.authclient import AuthApiClient
from agentgate.authsvc import AuthService, DelegationTarget, TargetType
from agentgate.authsvc.api import create_app as create_auth_app
from agentgate.website import UserProfile, WebsiteService
from agentgate.website.api import create_app as create_website_app

HUMAN = ("alice", "correct-horse-battery")

PROFILE = UserProfile(
    user="userAlice",
    email="alice@example.com",
    phone="+1-480-555-0117",
    address="428 Palm Walk, Tempe AZ 85281",
    card="**** **** **** 4242",
)


@pytest.fixture
def env(clock, rng):
    auth = AuthService(clock=clock, rng=rng)
    auth_http = TestClient(create_auth_app(auth))
    for name, group in [
        ("userAlice", "Users"),
        ("myWebsite", "Websites"),
        ("Business", "HighTrustAgents"),
        ("Casual", "LowTrustAgents"),
    ]:
        auth.register_entity(name, group)
    for level in TrustLevel:
        auth.add_policy(
            "Users",
            TargetType.DELEGATION,
            DelegationTarget(level.group_name, "Websites"),
            relative_validity=3600.0,
            absolute_validity=86400.0,
        )

    def client_for(name):
        return AuthApiClient(
            "http://testserver",
            name,
            auth.get_entity(name).distribution_key,
            http=auth_http,
            clock=clock,
            rng=rng,
        )

    site = WebsiteService(auth_client=client_for("myWebsite"), profile=PROFILE, clock=clock, rng=rng)
    app = create_website_app(
        site, human_users={HUMAN[0]: HUMAN[1]}, delegator=client_for("userAlice")
    )
    http = TestClient(app)

    class E:
        pass

    e = E()
    e.auth, e.site, e.http, e.client_for, e.clock = auth, site, http, client_for, clock
    return e


def login_via_http(e, agent="Business", trust=TrustLevel.HIGH):
    key_id = e.client_for("userAlice").create_delegation(trust, "Websites")["session_key_id"]
    key = bytes.fromhex(e.client_for(agent).redeem_session_key(key_id)["key"])
    challenge = e.http.get("/login/challenge").json()
    tag = compute_hmac(key, challenge["nonce"].encode("ascii"))
    response = e.http.post(
        "/login",
        json={
            "challenge_id": challenge["challenge_id"],
            "session_key_id": key_id,
            "hmac_hex": tag.hex(),
        },
    )
    return response, key, key_id


def test_challenge_endpoint_shape(env):
    body = env.http.get("/login/challenge").json()
    assert set(body) == {"challenge_id", "nonce"}
    assert len(body["nonce"]) == 32 and body["nonce"].isdigit()


def test_login_page_renders_nonce(env):
    page = env.http.get("/login")
    assert page.status_code == 200
    assert "Nonce" in page.text


def test_valid_login_returns_token(env):
    response, _, _ = login_via_http(env)
    assert response.status_code == 200
    body = response.json()
    assert body["agent"] == "Business"
    assert body["agent_group"] == "HighTrustAgents"
    assert len(body["session_token"]) == 64


def test_invalid_key_login_is_401(env, rng):
    key_id = env.client_for("userAlice").create_delegation(TrustLevel.HIGH, "Websites")[
        "session_key_id"
    ]
    env.client_for("Business").redeem_session_key(key_id)
    challenge = env.http.get("/login/challenge").json()
    bad_tag = compute_hmac(rng.token_bytes(32), challenge["nonce"].encode("ascii"))
    response = env.http.post(
        "/login",
        json={
            "challenge_id": challenge["challenge_id"],
            "session_key_id": key_id,
            "hmac_hex": bad_tag.hex(),
        },
    )
    assert response.status_code == 401


def test_profile_statuses_200_and_403(env):
    response, _, _ = login_via_http(env, agent="Casual", trust=TrustLevel.LOW)
    token = response.json()["session_token"]
    headers = {"Authorization": f"Bearer {token}"}
    ok = env.http.get("/api/profile/email", headers=headers)
    assert ok.status_code == 200
    assert ok.json()["value"] == PROFILE.email
    denied = env.http.get("/api/profile/phone", headers=headers)
    assert denied.status_code == 403


def test_profile_without_token_is_401(env):
    assert env.http.get("/api/profile/email").status_code == 401


def test_unknown_field_is_404(env):
    response, _, _ = login_via_http(env)
    headers = {"Authorization": f"Bearer {response.json()['session_token']}"}
    assert env.http.get("/api/profile/ssn", headers=headers).status_code == 404


def test_purchase_created_and_listed(env):
    response, _, _ = login_via_http(env)
    headers = {"Authorization": f"Bearer {response.json()['session_token']}"}
    created = env.http.post("/api/purchase", json={"item": "USB-C cable"}, headers=headers)
    assert created.status_code == 201
    assert created.json()["status"] == "simulated"
    listing = env.http.get("/api/purchases", auth=HUMAN)
    assert listing.json()[0]["item"] == "USB-C cable"


def test_purchase_denied_for_low_trust(env):
    response, _, _ = login_via_http(env, agent="Casual", trust=TrustLevel.LOW)
    headers = {"Authorization": f"Bearer {response.json()['session_token']}"}
    denied = env.http.post("/api/purchase", json={"item": "x"}, headers=headers)
    assert denied.status_code == 403


def test_scope_editor_basic_auth(env):
    ok = env.http.put(
        "/api/scopes/LowTrustAgents",
        json={"allowed_fields": ["email"], "may_purchase": False},
        auth=HUMAN,
    )
    assert ok.status_code == 204
    bad = env.http.put(
        "/api/scopes/LowTrustAgents",
        json={"allowed_fields": ["email"], "may_purchase": False},
        auth=("alice", "wrong"),
    )
    assert bad.status_code == 401
    invalid = env.http.put(
        "/api/scopes/LowTrustAgents",
        json={"allowed_fields": ["email"], "may_purchase": True},
        auth=HUMAN,
    )
    assert invalid.status_code == 400


def test_delegation_proxy_returns_id_only(env):
    created = env.http.post("/api/delegations", json={"trust": "High"}, auth=HUMAN)
    assert created.status_code == 201
    body = created.json()
    assert "session_key_id" in body
    key = env.auth.get_key(body["session_key_id"])
    assert key.key.hex() not in created.text


def test_delegation_proxy_denial_passthrough(env):
    # no Delegation policy exists toward this group for a bogus trust
    response = env.http.post("/api/delegations", json={"trust": "Ultra"}, auth=HUMAN)
    assert response.status_code == 400


def test_sessions_and_audit_views(env, clock):
    response, _, _ = login_via_http(env)
    assert response.status_code == 200
    sessions = env.http.get("/api/sessions", auth=HUMAN).json()
    assert sessions[0]["agent"] == "Business"
    assert sessions[0]["active"] is True
    clock.advance(3600.0)
    env.site.expire_sessions()
    audit = env.http.get("/api/audit", auth=HUMAN).json()
    assert any(e["event"] == "session_terminated" for e in audit)


def test_session_expiry_over_http_is_401(env, clock):
    response, _, _ = login_via_http(env)
    token = response.json()["session_token"]
    headers = {"Authorization": f"Bearer {token}"}
    clock.advance(3600.0)
    expired = env.http.get("/api/profile/email", headers=headers)
    assert expired.status_code == 401


def test_no_key_material_in_human_views(env):
    response, key, _ = login_via_http(env)
    assert response.status_code == 200
    for path in ("/api/sessions", "/api/purchases", "/api/audit", "/api/stats"):
        text = env.http.get(path, auth=HUMAN).text
        assert key.hex() not in text
