"""Agent protocol client: transcripts, request-count law, terminal statuses."""

import json

import pytest

from agentgate.core import ManualClock, TrustLevel
from agentgate.agent import (
    AgentClient,
    AgentConfig,
    CHANNEL_AGENT_AUTH,
    CHANNEL_AGENT_WEBSITE,
    ScriptedDecider,
    TaskScript,
)
from agentgate.agent.client import TaskAborted
from agentgate.agent.decider import (
    ACQUIRE_KEY,
    FETCH_FIELD,
    FINISH,
    LOGIN,
    PURCHASE,
    AgentTaskState,
)
from agentgate.harness.embedded import build_embedded_env
from agentgate.harness.fixture import provision_fixture


@pytest.fixture
def env():
    env = build_embedded_env(seed=7)
    provision_fixture(env)
    return env


def delegate(env, trust=TrustLevel.HIGH):
    return env.user_client().create_delegation(trust, "Websites")["session_key_id"]


class TestAgentConfig:
    def test_rejects_non_trust_group(self):
        with pytest.raises(ValueError):
            AgentConfig("x", "Users", b"\x00" * 32, "http://a", "http://w")

    def test_purchase_script_needs_fields(self):
        with pytest.raises(ValueError):
            TaskScript(1, fields_to_fetch=(), purchase_item="cable")


class TestScriptedDecider:
    def test_walks_script_in_order(self):
        decider = ScriptedDecider()
        state = AgentTaskState(fields_to_fetch=("email",), purchase_item="cable")
        assert decider.next_action(state).kind == ACQUIRE_KEY
        state.key_acquired = True
        assert decider.next_action(state).kind == LOGIN
        state.logged_in = True
        action = decider.next_action(state)
        assert (action.kind, action.field_name) == (FETCH_FIELD, "email")
        state.next_field_index = 1
        assert decider.next_action(state).kind == PURCHASE
        state.purchase_attempted = True
        assert decider.next_action(state).kind == FINISH

    def test_denial_moves_to_next_step_without_retry(self):
        decider = ScriptedDecider()
        state = AgentTaskState(fields_to_fetch=("email", "phone"), purchase_item=None)
        state.key_acquired = state.logged_in = True
        state.next_field_index = 1  # email denied and skipped
        state.denied_fields.append("email")
        assert decider.next_action(state).field_name == "phone"

    def test_empty_pending_work_finishes(self):
        decider = ScriptedDecider()
        state = AgentTaskState(fields_to_fetch=(), purchase_item=None)
        state.key_acquired = state.logged_in = True
        assert decider.next_action(state).kind == FINISH


class TestRunTask:
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_website_request_count_is_two_plus_n(self, env, n):
        fields = ("email", "phone", "address", "card")[:n]
        # pad with repeats to reach n=4 distinct fetch attempts
        while len(fields) < n:
            fields = fields + ("email",)
        key_id = delegate(env, TrustLevel.HIGH)
        agent = env.agent("Business", "HighTrustAgents")
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=fields))
        assert transcript.request_count(CHANNEL_AGENT_WEBSITE) == 2 + n
        assert transcript.fetch_request_count() == n

    def test_single_redemption_per_key(self, env):
        key_id = delegate(env)
        agent = env.agent("Business", "HighTrustAgents")
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=("email",)))
        assert transcript.redemption_count() == 1
        assert transcript.request_count(CHANNEL_AGENT_AUTH) == 1

    def test_high_trust_full_run_with_purchase(self, env):
        key_id = delegate(env, TrustLevel.HIGH)
        agent = env.agent("Business", "HighTrustAgents")
        script = TaskScript(
            key_id,
            fields_to_fetch=("email", "phone", "address", "card"),
            purchase_item="USB-C cable",
        )
        transcript = agent.run_task(script)
        assert transcript.terminal_status == "success"
        assert transcript.fields_fetched == ["email", "phone", "address", "card"]
        assert transcript.purchase_outcome == "done"
        # 2 login requests + 4 fetches + 1 purchase
        assert transcript.request_count(CHANNEL_AGENT_WEBSITE) == 7

    def test_low_trust_denied_field_continues(self, env):
        key_id = delegate(env, TrustLevel.LOW)
        agent = env.agent("Casual", "LowTrustAgents")
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=("email", "phone")))
        assert transcript.terminal_status == "success_with_denials"
        assert transcript.fields_fetched == ["email"]
        assert transcript.denied_fields == ["phone"]
        assert transcript.request_count(CHANNEL_AGENT_WEBSITE) == 4

    def test_out_of_group_acquisition_is_denied(self, env):
        key_id = delegate(env, TrustLevel.HIGH)
        agent = env.agent("Casual", "LowTrustAgents")
        transcript = agent.run_task(TaskScript(key_id))
        assert transcript.terminal_status == "denied"
        assert transcript.request_count(CHANNEL_AGENT_WEBSITE) == 0

    def test_session_expiry_mid_task_fails(self, env):
        key_id = delegate(env, TrustLevel.HIGH)
        agent = env.agent("Business", "HighTrustAgents")

        class ExpiringDecider(ScriptedDecider):
            def next_action(self, state):
                action = super().next_action(state)
                if action.kind == FETCH_FIELD and state.next_field_index == 1:
                    env.manual_clock.advance(3600.0)  # sleep past relative validity
                return action

        agent.decider = ExpiringDecider()
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=("email", "phone")))
        assert transcript.terminal_status == "failed"
        assert transcript.fields_fetched == ["email"]

    def test_no_key_material_in_transcript(self, env):
        key_id = delegate(env)
        agent = env.agent("Business", "HighTrustAgents")
        raw_key = env.auth_service.get_key(key_id).key
        transcript = agent.run_task(TaskScript(key_id, fields_to_fetch=("email",)))
        payload = transcript.to_json()
        assert raw_key.hex() not in payload
        assert env.credentials["Business"].hex() not in payload

    def test_determinism_modulo_timestamps(self):
        def one_run():
            env = build_embedded_env(seed=99)
            provision_fixture(env)
            key_id = env.user_client().create_delegation(TrustLevel.LOW, "Websites")[
                "session_key_id"
            ]
            agent = env.agent("Casual", "LowTrustAgents")
            doc = agent.run_task(TaskScript(key_id, fields_to_fetch=("email", "phone"))).to_dict()
            doc.pop("started_at"), doc.pop("finished_at")
            for event in doc["events"]:
                event.pop("timestamp")
            return doc

        assert json.dumps(one_run(), sort_keys=True) == json.dumps(one_run(), sort_keys=True)


class TestStandaloneOps:
    def test_acquire_then_login(self, env):
        key_id = delegate(env)
        agent = env.agent("Business", "HighTrustAgents")
        key = agent.acquire_key(key_id)
        token = agent.login(key, key_id)
        assert len(token) == 64

    def test_login_with_corrupted_key_raises(self, env):
        key_id = delegate(env)
        agent = env.agent("Business", "HighTrustAgents")
        key = agent.acquire_key(key_id)
        bad = bytes([key[0] ^ 0x01]) + key[1:]
        with pytest.raises(TaskAborted) as exc:
            agent.login(bad, key_id)
        assert exc.value.status_code == 401
