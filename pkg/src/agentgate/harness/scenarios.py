"""The four validation scenarios, run trial by trial against a HarnessEnv.

Each trial provisions its own fresh delegation (session keys are
exactly-once, so trials never share ids) and records compact
expected/observed strings; a trial passes iff they are equal.
Infrastructure failures raise ScenarioError instead of producing a
failed expectation.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from agentgate.core import TrustLevel
from agentgate.authclient import AuthApiError
from agentgate.agent.client import TaskAborted, TaskScript
from agentgate.harness.environment import HarnessEnv
from agentgate.harness.fixture import (
    AGENTS,
    ALLOWED_FIELDS_BY_TRUST,
    DEFAULT_POLICY_VALIDITIES,
    install_delegation_policy,
)

SCENARIOS = (
    "authentication",
    "fine_grained_access",
    "unauthorized_access",
    "session_management",
)

SESSION_SCENARIO_VALIDITY = 2.0


class ScenarioError(Exception):
    pass


@dataclass
class TrialResult:
    scenario: str
    trial: int
    expected: str
    observed: str
    transcripts: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.expected == self.observed

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "trial": self.trial,
            "expected": self.expected,
            "observed": self.observed,
            "passed": self.passed,
            "transcripts": self.transcripts,
        }


def _delegate(env: HarnessEnv, trust: TrustLevel) -> int:
    try:
        return env.user_client().create_delegation(trust, "Websites")["session_key_id"]
    except AuthApiError as exc:
        raise ScenarioError(f"fixture delegation failed: {exc}") from exc


def _agent_for(env: HarnessEnv, trust: TrustLevel):
    name = next(n for n, t in AGENTS.items() if t is trust)
    return env.agent(name, trust.group_name)


def _authentication_trial(env: HarnessEnv, trial: int) -> TrialResult:
    expected = "valid=200 invalid=401"
    agent = _agent_for(env, TrustLevel.HIGH)

    valid_id = _delegate(env, TrustLevel.HIGH)
    valid_key = agent.acquire_key(valid_id)
    try:
        agent.login(valid_key, valid_id)
        valid = "200"
    except TaskAborted as abort:
        valid = str(abort.status_code or "failed")

    invalid_id = _delegate(env, TrustLevel.HIGH)
    real_key = agent.acquire_key(invalid_id)
    corrupted = bytes([real_key[0] ^ 0xFF]) + real_key[1:]
    try:
        agent.login(corrupted, invalid_id)
        invalid = "accepted"
    except TaskAborted as abort:
        invalid = str(abort.status_code or "failed")

    return TrialResult(
        scenario="authentication",
        trial=trial,
        expected=expected,
        observed=f"valid={valid} invalid={invalid}",
    )


def _fine_grained_trial(env: HarnessEnv, trial: int) -> TrialResult:
    expected = "email=200 phone=403"
    key_id = _delegate(env, TrustLevel.LOW)
    agent = _agent_for(env, TrustLevel.LOW)
    transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=("email", "phone")))

    responses = [
        e.outcome.split(":", 1)[1]
        for e in transcript.events
        if e.operation == "fetch_field" and e.direction == "response"
    ]
    observed = " ".join(
        f"{name}={status}" for name, status in zip(("email", "phone"), responses)
    ) or "no fetches"
    return TrialResult(
        scenario="fine_grained_access",
        trial=trial,
        expected=expected,
        observed=observed,
        transcripts=[transcript.to_dict()],
    )


def _unauthorized_trial(env: HarnessEnv, trial: int) -> TrialResult:
    expected = "unauthorized=refused repeated=rejected"

    outsider_id = _delegate(env, TrustLevel.HIGH)
    casual = _agent_for(env, TrustLevel.LOW)
    try:
        casual.acquire_key(outsider_id)
        unauthorized = "issued"
    except AuthApiError as exc:
        unauthorized = "refused" if exc.code == "authorization_denied" else exc.code

    repeat_id = _delegate(env, TrustLevel.HIGH)
    business = _agent_for(env, TrustLevel.HIGH)
    business.acquire_key(repeat_id)
    try:
        business.acquire_key(repeat_id)
        repeated = "issued"
    except AuthApiError as exc:
        repeated = "rejected" if exc.code == "duplicate_issuance" else exc.code

    return TrialResult(
        scenario="unauthorized_access",
        trial=trial,
        expected=expected,
        observed=f"unauthorized={unauthorized} repeated={repeated}",
    )


def _session_management_trial(env: HarnessEnv, trial: int) -> TrialResult:
    expected = "before=200 post_expiry=401 session_removed=yes"
    key_id = _delegate(env, TrustLevel.LOW)
    agent = _agent_for(env, TrustLevel.LOW)
    key = agent.acquire_key(key_id)
    token = agent.login(key, key_id)
    headers = {"Authorization": f"Bearer {token}"}

    before = env.website_http.get("/api/profile/email", headers=headers).status_code
    env.elapse(SESSION_SCENARIO_VALIDITY)  # advance to exactly expires_at
    after = env.website_http.get("/api/profile/email", headers=headers).status_code

    # the expired session must be gone from the live table (sessions opened by
    # other scenarios with longer validities may legitimately remain)
    now = env.clock.now()
    sessions = env.human_request("GET", "/api/sessions").json()
    lingering = [
        s
        for s in sessions
        if s["agent"] == agent.config.name and s["expires_at"] <= now
    ]
    removed = "yes" if not lingering else "no"

    return TrialResult(
        scenario="session_management",
        trial=trial,
        expected=expected,
        observed=f"before={before} post_expiry={after} session_removed={removed}",
    )


_TRIALS: dict[str, Callable[[HarnessEnv, int], TrialResult]] = {
    "authentication": _authentication_trial,
    "fine_grained_access": _fine_grained_trial,
    "unauthorized_access": _unauthorized_trial,
    "session_management": _session_management_trial,
}


def run_scenario(
    env: HarnessEnv, name: str, trials: int = 5, parallel: bool = False
) -> list[TrialResult]:
    if name not in _TRIALS:
        raise ScenarioError(f"unknown scenario: {name!r}; pick from {SCENARIOS}")
    if trials < 1:
        raise ScenarioError("trials must be >= 1")
    trial_fn = _TRIALS[name]

    if name == "session_management":
        # short-lived sessions for this scenario only; restore defaults after
        install_delegation_policy(env, TrustLevel.LOW, SESSION_SCENARIO_VALIDITY, 86400.0)
        try:
            return [trial_fn(env, i) for i in range(1, trials + 1)]
        finally:
            rel, abs_ = DEFAULT_POLICY_VALIDITIES[TrustLevel.LOW]
            install_delegation_policy(env, TrustLevel.LOW, rel, abs_)

    if parallel:
        with ThreadPoolExecutor(max_workers=min(trials, 8)) as pool:
            return list(pool.map(lambda i: trial_fn(env, i), range(1, trials + 1)))
    return [trial_fn(env, i) for i in range(1, trials + 1)]


# -- end-to-end latency measurement ---------------------------------------------

E2E_CASES = {
    "high_trust_success": (TrustLevel.HIGH, "success"),
    "medium_trust_success": (TrustLevel.MEDIUM, "success"),
    "low_trust_success": (TrustLevel.LOW, "success"),
    "unauthorized": (TrustLevel.HIGH, "denied"),
}


class MeasurementError(Exception):
    pass


def measure_e2e(env: HarnessEnv, case: str, repetitions: int = 5) -> dict[str, Any]:
    """Wall-clock duration from agent start to permitted data retrieved
    (or, for the unauthorized case, to Auth's refusal)."""
    if case not in E2E_CASES:
        raise MeasurementError(f"unknown case: {case!r}; pick from {sorted(E2E_CASES)}")
    if repetitions < 1:
        raise MeasurementError("repetitions must be >= 1")
    trust, expected_terminal = E2E_CASES[case]

    samples_ms: list[float] = []
    failures: list[str] = []
    for _ in range(repetitions):
        key_id = _delegate(env, trust)
        if case == "unauthorized":
            agent = _agent_for(env, TrustLevel.LOW)  # outside ExpectedOwnerGroups
            fields: tuple[str, ...] = ()
        else:
            agent = _agent_for(env, trust)
            fields = tuple(ALLOWED_FIELDS_BY_TRUST[trust])
        started = time.perf_counter()
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=fields))
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        if transcript.terminal_status == expected_terminal:
            samples_ms.append(elapsed_ms)
        else:
            failures.append(
                f"terminal_status={transcript.terminal_status} (expected {expected_terminal})"
            )

    if not samples_ms:
        raise MeasurementError(f"no successful repetitions for {case}: {failures}")
    return {
        "case": case,
        "repetitions": repetitions,
        "samples_ms": samples_ms,
        "mean_ms": statistics.fmean(samples_ms),
        "std_ms": statistics.stdev(samples_ms) if len(samples_ms) > 1 else 0.0,
        "excluded_failures": failures,
    }
