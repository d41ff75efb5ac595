"""`agent` command line: run one scripted task and emit the transcript."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from agentgate.agent.client import AgentClient, AgentConfig, TaskScript
from agentgate.website.api import load_key_hex


@click.group()
def main() -> None:
    """Delegated-task agent."""


@main.command("run")
@click.option("--name", required=True, help="Agent entity name.")
@click.option("--group", required=True, help="Agent trust group.")
@click.option("--auth-url", default="http://127.0.0.1:8470", show_default=True)
@click.option("--website-url", default="http://127.0.0.1:8471", show_default=True)
@click.option("--key-id", required=True, type=int, help="Delegated session key id.")
@click.option("--fields", default="", help="Comma-separated profile fields to fetch.")
@click.option("--purchase", default=None, help="Item name for the mock purchase.")
@click.option("--dist-key", default=None, help="Distribution key as hex.")
@click.option("--dist-key-file", default=None, help="Hex file or fixture JSON with the key.")
@click.option("--out", default=None, help="Write the transcript JSON here instead of stdout.")
def run(
    name: str,
    group: str,
    auth_url: str,
    website_url: str,
    key_id: int,
    fields: str,
    purchase: str | None,
    dist_key: str | None,
    dist_key_file: str | None,
    out: str | None,
) -> None:
    """Acquire the key, log in, fetch fields, optionally purchase."""
    if dist_key:
        key = bytes.fromhex(dist_key)
    elif dist_key_file:
        key = load_key_hex(dist_key_file, name)
    else:
        raise click.UsageError("one of --dist-key / --dist-key-file is required")

    config = AgentConfig(
        name=name,
        group=group,
        distribution_key=key,
        auth_url=auth_url,
        website_url=website_url,
    )
    script = TaskScript(
        session_key_id=key_id,
        fields_to_fetch=tuple(f.strip() for f in fields.split(",") if f.strip()),
        purchase_item=purchase,
    )
    client = AgentClient(config)
    try:
        transcript = client.run_task(script)
    finally:
        client.close()

    payload = transcript.to_json()
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    else:
        click.echo(payload)
    sys.exit(0 if transcript.terminal_status.startswith("success") else 1)


if __name__ == "__main__":
    main()
