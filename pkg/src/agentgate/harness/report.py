"""Machine-readable results report plus a rendered text table.

The JSON document is emitted with sorted keys so reruns with the same
seed are byte-identical apart from timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from agentgate.harness.latency import MessageCountReport
from agentgate.harness.scenarios import TrialResult

ASPECT_TITLES = {
    "authentication": "Authentication",
    "fine_grained_access": "Fine-Grained Access Control",
    "unauthorized_access": "Unauthorized Access Handling",
    "session_management": "Session Management",
}

SCENARIO_DESCRIPTIONS = {
    "authentication": "agent login with correct vs. invalid session key",
    "fine_grained_access": "low-trust agent requests email and phone fields",
    "unauthorized_access": "out-of-group and repeated session key redemption",
    "session_management": "session used after its relative validity period",
}

CHANNEL_COUNT_NOTE = (
    "observed one-way request counts per channel are reported as measured; "
    "the model's 4x per-channel coefficients are applied as given, not "
    "asserted against these counts"
)


def build_report(
    *,
    seed: int,
    results: dict[str, list[TrialResult]],
    message_report: MessageCountReport | None = None,
    e2e_stats: dict[str, Any] | None = None,
    latency_model: dict[str, Any] | None = None,
    generated_at: str = "",
) -> dict[str, Any]:
    scenario_blocks = []
    for name, trial_results in results.items():
        scenario_blocks.append(
            {
                "name": name,
                "aspect": ASPECT_TITLES.get(name, name),
                "description": SCENARIO_DESCRIPTIONS.get(name, ""),
                "trials": [t.to_dict() for t in trial_results],
                "passed": sum(1 for t in trial_results if t.passed),
                "failed": sum(1 for t in trial_results if not t.passed),
            }
        )
    report: dict[str, Any] = {
        "seed": seed,
        "generated_at": generated_at,
        "scenarios": scenario_blocks,
    }
    if message_report is not None:
        report["message_counts"] = {**message_report.to_dict(), "note": CHANNEL_COUNT_NOTE}
    if e2e_stats is not None:
        report["e2e_latency"] = e2e_stats
    if latency_model is not None:
        report["latency_model"] = latency_model
    return report


def write_report(report: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def render_table(results: dict[str, list[TrialResult]]) -> str:
    headers = ("Aspect", "Test Scenario", "Expected", "Observed")
    rows: list[tuple[str, str, str, str]] = []
    for name, trial_results in results.items():
        if not trial_results:
            continue
        expected = trial_results[0].expected
        observed_values = {t.observed for t in trial_results}
        passed = sum(1 for t in trial_results if t.passed)
        observed = f"{passed}/{len(trial_results)} trials: " + "; ".join(
            sorted(observed_values)
        )
        rows.append(
            (
                ASPECT_TITLES.get(name, name),
                SCENARIO_DESCRIPTIONS.get(name, ""),
                expected,
                observed,
            )
        )

    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(4)
    ]

    def line(cells: tuple[str, str, str, str]) -> str:
        return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"

    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [rule, line(headers), rule]
    out.extend(line(r) for r in rows)
    out.append(rule)
    return "\n".join(out)
