"""Signed-request envelope: signatures, wire format, replay cache."""

import pytest

from agentgate.core import ManualClock, SeededRandomSource, generate_session_key
from agentgate.authsvc.envelope import (
    ReplayCache,
    SignedRequest,
    canonical_body,
    sign_request,
    signature_valid,
)


@pytest.fixture
def key(rng):
    return generate_session_key(rng=rng)


def test_sign_and_verify_round_trip(clock, rng, key):
    req = sign_request("userAlice", {"id": 7}, key, clock=clock, rng=rng)
    assert req.sender == "userAlice"
    assert len(req.request_nonce) == 16
    assert signature_valid(req, key)
    assert req.payload() == {"id": 7}


def test_wire_round_trip(clock, rng, key):
    req = sign_request("userAlice", {"trust": "High"}, key, clock=clock, rng=rng)
    wire = req.to_wire()
    assert set(wire) == {"sender", "timestamp", "request_nonce", "body", "signature"}
    restored = SignedRequest.from_wire(wire)
    assert restored == req
    assert signature_valid(restored, key)


def test_wrong_key_fails(clock, rng, key):
    req = sign_request("userAlice", {"id": 7}, key, clock=clock, rng=rng)
    other = generate_session_key(rng=rng)
    assert not signature_valid(req, other)


def test_tampered_body_fails(clock, rng, key):
    req = sign_request("userAlice", {"id": 7}, key, clock=clock, rng=rng)
    tampered = SignedRequest(
        req.sender, req.timestamp, req.request_nonce, canonical_body({"id": 8}), req.signature
    )
    assert not signature_valid(tampered, key)


def test_canonical_body_is_stable():
    assert canonical_body({"b": 1, "a": 2}) == canonical_body({"a": 2, "b": 1})


def test_replay_cache_rejects_second_use():
    cache = ReplayCache(retention_seconds=600.0)
    assert cache.check_and_store("a", b"n1", now=1000.0)
    assert not cache.check_and_store("a", b"n1", now=1001.0)
    # a different sender with the same nonce is a distinct pair
    assert cache.check_and_store("b", b"n1", now=1001.0)


def test_replay_cache_expires_entries():
    cache = ReplayCache(retention_seconds=600.0)
    assert cache.check_and_store("a", b"n1", now=1000.0)
    # still within retention
    assert not cache.check_and_store("a", b"n1", now=1599.0)
    # pruned once the retention window has passed
    assert cache.check_and_store("a", b"n1", now=1601.0)
