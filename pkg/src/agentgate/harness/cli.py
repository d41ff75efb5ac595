"""`harness` command line: provision, run scenarios, evaluate the latency model."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from agentgate.core import SystemClock, SystemRandomSource, rfc3339
from agentgate.harness.environment import HarnessEnv, ProvisionError
from agentgate.harness.fixture import DEFAULT_HUMAN, provision_fixture
from agentgate.harness.latency import (
    LatencyModelParams,
    compute_total_latency,
    interaction_count,
    verify_message_counts,
)
from agentgate.harness.report import build_report, render_table, write_report
from agentgate.harness.scenarios import (
    E2E_CASES,
    SCENARIOS,
    measure_e2e,
    run_scenario,
)


def _external_env(auth_url: str, website_url: str, state_path: str | None, human: str) -> HarnessEnv:
    credentials: dict[str, bytes] = {}
    if state_path and Path(state_path).exists():
        doc = json.loads(Path(state_path).read_text(encoding="utf-8"))
        credentials = {
            name: bytes.fromhex(entry["distribution_key"])
            for name, entry in doc.get("entities", {}).items()
        }
    username, _, password = human.partition(":")
    return HarnessEnv(
        auth_http=httpx.Client(base_url=auth_url),
        website_http=httpx.Client(base_url=website_url),
        auth_url=auth_url,
        website_url=website_url,
        credentials=credentials,
        human=(username, password),
        clock=SystemClock(),
        rng=SystemRandomSource(),
    )


def _write_state(env: HarnessEnv, state_path: str) -> None:
    doc = {
        "entities": {
            name: {"distribution_key": key.hex()} for name, key in env.credentials.items()
        }
    }
    Path(state_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")


@click.group()
def main() -> None:
    """Evaluation harness for the delegated-access stack."""


@main.command("provision")
@click.option("--auth-url", default="http://127.0.0.1:8470", show_default=True)
@click.option("--website-url", default="http://127.0.0.1:8471", show_default=True)
@click.option("--state", "state_path", default="fixture.json", show_default=True,
              help="Where entity credentials are stored for reruns and agents.")
@click.option("--human", default=f"{DEFAULT_HUMAN[0]}:{DEFAULT_HUMAN[1]}", show_default=True,
              help="user:password for the website's human endpoints.")
@click.option("--skip-website", is_flag=True,
              help="Bootstrap entities/policies only (before the website is up).")
def provision(
    auth_url: str, website_url: str, state_path: str, human: str, skip_website: bool
) -> None:
    """Register the demo entities, delegation policies, and default scopes."""
    env = _external_env(auth_url, website_url, state_path, human)
    try:
        description = provision_fixture(env, skip_website=skip_website)
    except ProvisionError as exc:
        raise click.ClickException(str(exc)) from exc
    _write_state(env, state_path)
    click.echo(json.dumps(description, indent=2, sort_keys=True))


@main.command("run")
@click.option("--scenario", default="all", show_default=True,
              help=f"One of {('all',) + SCENARIOS}.")
@click.option("--trials", default=5, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--report", "report_path", default=None, help="Write the JSON report here.")
@click.option("--parallel", is_flag=True, help="Run trials concurrently where safe.")
@click.option("--measure-e2e", "e2e_reps", default=0, show_default=True,
              help="Also measure wall-clock e2e latency with this many repetitions.")
@click.option("--embedded/--external", default=True, show_default=True,
              help="In-process deterministic stack vs. externally running services.")
@click.option("--auth-url", default="http://127.0.0.1:8470", show_default=True)
@click.option("--website-url", default="http://127.0.0.1:8471", show_default=True)
@click.option("--state", "state_path", default="fixture.json", show_default=True)
@click.option("--human", default=f"{DEFAULT_HUMAN[0]}:{DEFAULT_HUMAN[1]}", show_default=True)
def run(
    scenario: str,
    trials: int,
    seed: int,
    report_path: str | None,
    parallel: bool,
    e2e_reps: int,
    embedded: bool,
    auth_url: str,
    website_url: str,
    state_path: str,
    human: str,
) -> None:
    """Run the validation scenarios and emit the results report."""
    names = SCENARIOS if scenario == "all" else (scenario,)
    for name in names:
        if name not in SCENARIOS:
            raise click.ClickException(f"unknown scenario {name!r}; pick from {SCENARIOS}")

    if embedded:
        from agentgate.harness.embedded import build_embedded_env

        env = build_embedded_env(seed)
    else:
        env = _external_env(auth_url, website_url, state_path, human)
    try:
        provision_fixture(env)
    except ProvisionError as exc:
        raise click.ClickException(str(exc)) from exc

    results = {name: run_scenario(env, name, trials=trials, parallel=parallel) for name in names}

    transcripts = [
        t
        for trial_results in results.values()
        for trial in trial_results
        for t in trial.transcripts
    ]
    message_report = verify_message_counts(
        transcripts,
        website_auth_requests=env.website_stats()["auth_redemption_calls"],
    )

    e2e_stats = None
    if e2e_reps > 0:
        e2e_stats = {case: measure_e2e(env, case, e2e_reps) for case in sorted(E2E_CASES)}

    report = build_report(
        seed=seed,
        results=results,
        message_report=message_report,
        e2e_stats=e2e_stats,
        generated_at=rfc3339(SystemClock().now()),
    )
    click.echo(render_table(results))
    total = sum(len(r) for r in results.values())
    passed = sum(1 for r in results.values() for t in r if t.passed)
    click.echo(f"\n{passed}/{total} trials passed; "
               f"message counts {'ok' if message_report.all_ok else 'FLAGGED'}")
    if report_path:
        write_report(report, report_path)
        click.echo(f"report written to {report_path}")
    sys.exit(0 if passed == total and message_report.all_ok else 1)


@main.command("latency")
@click.option("--l-e2e", required=True, type=float, help="Measured end-to-end latency (s).")
@click.option("--l-a2a", required=True, type=float, help="Agent-Auth network latency (s).")
@click.option("--l-w2a", required=True, type=float, help="Website-Auth network latency (s).")
@click.option("--l-a2w", required=True, type=float, help="Agent-website network latency (s).")
@click.option("--n", required=True, type=int, help="Number of profile fields fetched.")
def latency(l_e2e: float, l_a2a: float, l_w2a: float, l_a2w: float, n: int) -> None:
    """Evaluate the distributed-deployment latency model."""
    try:
        params = LatencyModelParams(l_e2e=l_e2e, l_a2a=l_a2a, l_w2a=l_w2a, l_a2w=l_a2w, n=n)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    total = compute_total_latency(params)
    click.echo(json.dumps({
        "interactions_x": interaction_count(n),
        "l_total_seconds": total,
    }, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
