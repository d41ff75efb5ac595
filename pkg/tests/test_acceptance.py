"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its runtime bound. Every criterion is exact (no
tolerances); runtime bounds are asserted with perf counters.
"""

import itertools
import random
import threading
import time
from fractions import Fraction

import pytest

from agentgate.core import ManualClock, SeededRandomSource, TrustLevel, compute_hmac
from agentgate.authclient import AuthApiClient, AuthApiError
from agentgate.authsvc import (
    AuthorizationDenied,
    AuthService,
    DelegationTarget,
    DuplicateIssuance,
    KeyExpired,
    TargetType,
    UnknownKey,
)
from agentgate.authsvc.envelope import sign_request
from agentgate.agent.client import TaskScript
from agentgate.harness.embedded import build_embedded_env
from agentgate.harness.fixture import DEFAULT_SCOPE_MAP, provision_fixture
from agentgate.harness.latency import (
    LatencyModelParams,
    compute_total_latency,
    verify_message_counts,
)
from agentgate.harness.scenarios import run_scenario

from test_core import HMAC_VECTORS, hmac_sha256_oracle

PROFILE_FIELDS = ("email", "phone", "address", "card")


def _finish(name: str, started: float, limit_seconds: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < limit_seconds, f"{name} exceeded {limit_seconds}s ({elapsed:.2f}s)"
    print(f"PASS [{elapsed:5.2f}s < {limit_seconds:3.0f}s] {name}")


@pytest.fixture
def env():
    env = build_embedded_env(seed=42)
    provision_fixture(env)
    return env


def http_login(env, agent_name, group, trust):
    key_id = env.user_client().create_delegation(trust, "Websites")["session_key_id"]
    key = bytes.fromhex(
        env.auth_client_for(agent_name).redeem_session_key(key_id)["key"]
    )
    challenge = env.website_http.get("/login/challenge").json()
    tag = compute_hmac(key, challenge["nonce"].encode("ascii"))
    response = env.website_http.post(
        "/login",
        json={
            "challenge_id": challenge["challenge_id"],
            "session_key_id": key_id,
            "hmac_hex": tag.hex(),
        },
    )
    assert response.status_code == 200
    return response.json()["session_token"]


def test_criterion_authentication(env):
    """5/5 valid-key logins succeed; 5/5 invalid-key logins return 401."""
    started = time.perf_counter()
    results = run_scenario(env, "authentication", trials=5)
    observed = [t.observed for t in results]
    assert observed == ["valid=200 invalid=401"] * 5, observed
    _finish("authentication: 5/5 valid 200, 5/5 invalid 401", started, 10.0)


def test_criterion_fine_grained_access(env):
    """Low-trust email 200 / phone 403 in 5/5 trials, plus the exhaustive
    scope-soundness sweep over all 16 field subsets."""
    started = time.perf_counter()
    results = run_scenario(env, "fine_grained_access", trials=5)
    observed = [t.observed for t in results]
    assert observed == ["email=200 phone=403"] * 5, observed

    token = http_login(env, "Casual", "LowTrustAgents", TrustLevel.LOW)
    headers = {"Authorization": f"Bearer {token}"}
    for subset in itertools.chain.from_iterable(
        itertools.combinations(PROFILE_FIELDS, r) for r in range(5)
    ):
        put = env.human_request(
            "PUT",
            "/api/scopes/LowTrustAgents",
            json={"allowed_fields": list(subset), "may_purchase": False},
        )
        assert put.status_code == 204
        for field_name in PROFILE_FIELDS:
            status = env.website_http.get(
                f"/api/profile/{field_name}", headers=headers
            ).status_code
            assert status == (200 if field_name in subset else 403), (
                subset, field_name, status,
            )
    fields, may_purchase = DEFAULT_SCOPE_MAP["LowTrustAgents"]
    env.human_request(
        "PUT",
        "/api/scopes/LowTrustAgents",
        json={"allowed_fields": sorted(fields), "may_purchase": may_purchase},
    )
    _finish("fine-grained access: 5/5 email 200 / phone 403 + 16-subset sweep", started, 30.0)


def test_criterion_unauthorized_handling(env):
    """5/5 out-of-group and 5/5 repeated redemptions denied; 16 simultaneous
    redemptions of one id yield exactly 1 success."""
    started = time.perf_counter()
    results = run_scenario(env, "unauthorized_access", trials=5)
    observed = [t.observed for t in results]
    assert observed == ["unauthorized=refused repeated=rejected"] * 5, observed

    # concurrency variant over the HTTP surface
    contenders = {}
    for i in range(16):
        name = f"SwarmAgent{i}"
        body = env.auth_http.post(
            "/entities", json={"name": name, "group": "HighTrustAgents"}
        ).json()
        contenders[name] = bytes.fromhex(body["distribution_key"])
    key_id = env.user_client().create_delegation(TrustLevel.HIGH, "Websites")[
        "session_key_id"
    ]

    barrier = threading.Barrier(16)
    outcomes: list[str] = []
    outcome_lock = threading.Lock()

    def contend(name: str) -> None:
        client = AuthApiClient(
            env.auth_url, name, contenders[name], http=env.auth_http, clock=env.clock
        )
        barrier.wait()
        try:
            client.redeem_session_key(key_id)
            result = "ok"
        except AuthApiError as exc:
            result = exc.code
        with outcome_lock:
            outcomes.append(result)

    threads = [threading.Thread(target=contend, args=(n,)) for n in contenders]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert outcomes.count("ok") == 1, outcomes
    assert outcomes.count("duplicate_issuance") == 15, outcomes
    owners = env.auth_service.get_key(key_id).owners
    assert len(owners) == 1 and owners[0][1] == "HighTrustAgents"
    _finish(
        "unauthorized handling: 5/5 refused, 5/5 rejected, 16-way race -> 1 issuance",
        started,
        30.0,
    )


def test_criterion_session_management(env):
    """2 s relative validity with the injected clock: 5/5 post-expiry requests
    fail and sessions are removed; the expires_at boundary itself fails."""
    started = time.perf_counter()
    results = run_scenario(env, "session_management", trials=5)
    observed = [t.observed for t in results]
    assert observed == ["before=200 post_expiry=401 session_removed=yes"] * 5, observed

    # explicit boundary: alive strictly before expires_at, dead exactly at it
    from agentgate.harness.fixture import install_delegation_policy
    from agentgate.harness.scenarios import SESSION_SCENARIO_VALIDITY

    install_delegation_policy(env, TrustLevel.LOW, SESSION_SCENARIO_VALIDITY, 86400.0)
    token = http_login(env, "Casual", "LowTrustAgents", TrustLevel.LOW)
    headers = {"Authorization": f"Bearer {token}"}
    env.manual_clock.advance(SESSION_SCENARIO_VALIDITY - 0.001)
    assert env.website_http.get("/api/profile/email", headers=headers).status_code == 200
    env.manual_clock.advance(0.001)
    assert env.website_http.get("/api/profile/email", headers=headers).status_code == 401
    _finish("session management: 5/5 auto-terminated, boundary fails", started, 10.0)


def test_criterion_latency_model(env):
    """Model arithmetic matches an exact independent oracle on 100 random
    parameter sets; x = 2 + n holds on real transcripts for n in 0..4."""
    started = time.perf_counter()

    rng = random.Random(20260809)

    def dyadic() -> float:
        # k / 2^m is exactly representable; all model arithmetic stays exact
        return rng.randrange(0, 1 << 16) / (1 << rng.randrange(0, 7))

    for _ in range(100):
        params = LatencyModelParams(
            l_e2e=dyadic(), l_a2a=dyadic(), l_w2a=dyadic(), l_a2w=dyadic(),
            n=rng.randrange(0, 12),
        )
        expected = (
            Fraction(params.l_e2e)
            + 4 * Fraction(params.l_a2a)
            + 4 * Fraction(params.l_w2a)
            + (2 + params.n) * Fraction(params.l_a2w)
        )
        assert Fraction(compute_total_latency(params)) == expected

    transcripts = []
    agent = env.agent("Business", "HighTrustAgents")
    for n in range(5):
        key_id = env.user_client().create_delegation(TrustLevel.HIGH, "Websites")[
            "session_key_id"
        ]
        fields = tuple(["email", "phone", "address", "card", "email"][:n])
        transcripts.append(agent.run_task(TaskScript(key_id, fields_to_fetch=fields)))
    report = verify_message_counts(transcripts)
    assert report.all_ok
    assert [(c.n, c.observed, c.expected) for c in report.checks] == [
        (n, 2 + n, 2 + n) for n in range(5)
    ]
    _finish("latency model: 100/100 exact, x = 2 + n for n in 0..4", started, 10.0)


def test_criterion_property_suite():
    """>= 1000 randomized operations never violate owner-group soundness or
    exactly-once issuance; HMAC output matches the reference oracle."""
    started = time.perf_counter()

    for key, msg, expected_hex in HMAC_VECTORS:
        assert hmac_sha256_oracle(key, msg).hex() == expected_hex
    probe = SeededRandomSource(8)
    for _ in range(25):
        key, msg = probe.token_bytes(32), probe.token_bytes(64)
        assert compute_hmac(key, msg) == hmac_sha256_oracle(key, msg)

    rng = random.Random(4242)
    clock = ManualClock()
    svc = AuthService(clock=clock, rng=SeededRandomSource(4242))
    groups = {level.group_name: [] for level in TrustLevel}
    svc.register_entity("userAlice", "Users")
    svc.register_entity("myWebsite", "Websites")
    entities = ["userAlice", "myWebsite"]
    for level in TrustLevel:
        for i in range(3):
            name = f"{level.value}Agent{i}"
            svc.register_entity(name, level.group_name)
            groups[level.group_name].append(name)
            entities.append(name)
        svc.add_policy(
            "Users",
            TargetType.DELEGATION,
            DelegationTarget(level.group_name, "Websites"),
            relative_validity=rng.choice([60.0, 600.0]),
            absolute_validity=rng.choice([500.0, 2000.0, 8000.0]),
        )

    def envelope(name, payload):
        return sign_request(
            name, payload, svc.get_entity(name).distribution_key, clock=clock, rng=svc.rng
        )

    issued: dict[int, set[str]] = {}  # mirror of successful issuances per key
    expected: dict[int, set[str]] = {}
    expirations: dict[int, float] = {}
    created_ids: list[int] = []
    max_id = 0
    stats = {"created": 0, "issued": 0, "duplicate": 0, "denied": 0, "expired": 0}

    def check_invariants():
        snapshot = svc.snapshot()
        for key_id, info in snapshot["keys"].items():
            owner_groups = [g for _, g in info["owners"]]
            assert set(owner_groups) <= set(info["expected_owner_groups"])
            assert len(owner_groups) == len(set(owner_groups)), "duplicate group slot"
            assert len(owner_groups) <= len(info["expected_owner_groups"])
            assert set(owner_groups) == issued.get(key_id, set())
        assert set(snapshot["purged_ids"]).isdisjoint(snapshot["keys"])

    operations = 1200
    for step in range(operations):
        op = rng.choices(
            ("create", "redeem", "purge", "advance"), weights=(3, 6, 1, 2)
        )[0]
        if op == "create":
            trust = rng.choice(list(TrustLevel))
            key = svc.create_delegated_session_key(
                envelope(
                    "userAlice",
                    {"trust": trust.value, "target_group": "Websites", "purpose": "fuzz"},
                )
            )
            assert key.id > max_id, "session key ids must be strictly increasing"
            max_id = key.id
            issued[key.id] = set()
            expected[key.id] = set(key.expected_owner_groups)
            expirations[key.id] = key.absolute_expiration
            created_ids.append(key.id)
            stats["created"] += 1
        elif op == "redeem":
            name = rng.choice(entities)
            # bias toward recent keys so live, expired, and unknown ids all occur
            key_id = (
                rng.choice(created_ids[-12:] + created_ids[:2] + [max_id + 1000])
                if created_ids
                else max_id + 1000
            )
            group = svc.get_entity(name).group
            try:
                svc.request_session_key(envelope(name, {"id": key_id}))
                assert group in expected[key_id], "issued outside expected groups"
                assert group not in issued[key_id], "second issuance for an owned group"
                assert clock.now() < expirations[key_id], "issued an expired key"
                issued[key_id].add(group)
                stats["issued"] += 1
            except DuplicateIssuance:
                assert group in issued[key_id]
                stats["duplicate"] += 1
            except AuthorizationDenied:
                assert group not in expected[key_id]
                stats["denied"] += 1
            except KeyExpired:
                assert clock.now() >= expirations[key_id]
                stats["expired"] += 1
            except UnknownKey:
                assert key_id not in issued
        elif op == "purge":
            svc.purge_expired_keys()
        else:
            clock.advance(rng.uniform(1.0, 400.0))
        check_invariants()

    assert operations >= 1000
    # the fuzz actually exercised every interesting path
    assert stats["issued"] >= 60, stats
    assert stats["duplicate"] >= 10, stats
    assert stats["denied"] >= 20, stats
    assert stats["expired"] >= 5, stats
    _finish(
        f"property suite: {operations} ops, no soundness violation "
        f"({stats['issued']} issuances, {stats['duplicate']} duplicates blocked)",
        started,
        60.0,
    )
