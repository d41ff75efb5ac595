"""Pluggable decision interface between protocol state and the next action.

The default decider is a deterministic script interpreter; anything that
maps an AgentTaskState to an Action (an LLM, a planner) can be swapped in
without touching the protocol client.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

ACQUIRE_KEY = "acquire_key"
LOGIN = "login"
FETCH_FIELD = "fetch_field"
PURCHASE = "purchase"
FINISH = "finish"


@dataclass(frozen=True)
class Action:
    kind: str
    field_name: Optional[str] = None
    item: Optional[str] = None


@dataclass
class AgentTaskState:
    fields_to_fetch: tuple[str, ...]
    purchase_item: Optional[str]
    key_acquired: bool = False
    logged_in: bool = False
    next_field_index: int = 0
    purchase_attempted: bool = False
    aborted: bool = False
    denied_fields: list[str] = field(default_factory=list)

    def pending_fields(self) -> tuple[str, ...]:
        return self.fields_to_fetch[self.next_field_index :]


class Decider(Protocol):
    def next_action(self, state: AgentTaskState) -> Action: ...


class ScriptedDecider:
    """Walks the task script in order; a denied step is never retried."""

    def next_action(self, state: AgentTaskState) -> Action:
        if state.aborted:
            return Action(FINISH)
        if not state.key_acquired:
            return Action(ACQUIRE_KEY)
        if not state.logged_in:
            return Action(LOGIN)
        if state.next_field_index < len(state.fields_to_fetch):
            return Action(FETCH_FIELD, field_name=state.fields_to_fetch[state.next_field_index])
        if state.purchase_item is not None and not state.purchase_attempted:
            return Action(PURCHASE, item=state.purchase_item)
        return Action(FINISH)
