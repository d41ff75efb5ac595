"""HTTP + JSON surface of the website.

Agent-facing: GET /login/challenge, POST /login, GET /api/profile/{field},
POST /api/purchase (bearer session token). Human-facing (HTTP Basic):
scope editor, delegation initiation proxy, and read endpoints for
sessions, purchases, audit events and stats. 200/403 on the data-access
endpoints are the normative allowed/denied statuses.
"""

from __future__ import annotations

import hmac as _hmac
import json
from pathlib import Path
from typing import Any

import click
from fastapi import Depends, FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.security import HTTPBasic, HTTPBasicCredentials
from pydantic import BaseModel

from agentgate.core import TrustLevel
from agentgate.authclient import AuthApiClient, AuthApiError
from agentgate.website.service import (
    AccessDenied,
    AuthenticationFailed,
    ChallengeError,
    KeyExpiredError,
    SessionError,
    UnknownField,
    UsageError,
    UserProfile,
    WebsiteError,
    WebsiteService,
)

STATUS_BY_ERROR: dict[type[WebsiteError], int] = {
    ChallengeError: 401,
    AuthenticationFailed: 401,
    KeyExpiredError: 401,
    SessionError: 401,
    AccessDenied: 403,
    UnknownField: 404,
    UsageError: 400,
}

LOGIN_PAGE = """<!doctype html>
<html>
  <head><title>Agent login</title></head>
  <body>
    <h1>Agent login</h1>
    <p>Challenge <code>{challenge_id}</code></p>
    <p>Nonce: <code id="nonce">{nonce}</code></p>
    <p>Submit the session key id and the HMAC over the nonce to POST /login.</p>
  </body>
</html>
"""


class LoginModel(BaseModel):
    challenge_id: str
    session_key_id: int
    hmac_hex: str


class ScopeModel(BaseModel):
    allowed_fields: list[str]
    may_purchase: bool = False


class PurchaseModel(BaseModel):
    item: str


class DelegationModel(BaseModel):
    trust: str
    purpose: str = ""


def create_app(
    service: WebsiteService,
    *,
    human_users: dict[str, str],
    delegator: AuthApiClient | None = None,
    ui_dist: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="website-service", docs_url=None, redoc_url=None)
    basic = HTTPBasic(auto_error=False)

    def require_human(
        credentials: HTTPBasicCredentials | None = Depends(basic),
    ) -> str:
        if credentials is not None:
            expected = human_users.get(credentials.username)
            if expected is not None and _hmac.compare_digest(
                credentials.password.encode(), expected.encode()
            ):
                return credentials.username
        raise UsageAuthRequired()

    @app.exception_handler(WebsiteError)
    def website_error_handler(_: Request, exc: WebsiteError) -> JSONResponse:
        status = STATUS_BY_ERROR.get(type(exc), 500)
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": str(exc)})

    @app.exception_handler(UsageAuthRequired)
    def human_auth_handler(_: Request, exc: "UsageAuthRequired") -> JSONResponse:
        return JSONResponse(
            status_code=401,
            content={"error": "human_auth_required", "detail": "bad credentials"},
            headers={"WWW-Authenticate": "Basic"},
        )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    # -- agent-facing ---------------------------------------------------------

    @app.get("/login/challenge")
    def login_challenge() -> dict:
        challenge = service.issue_challenge()
        return {"challenge_id": challenge.challenge_id, "nonce": challenge.nonce}

    @app.get("/login", response_class=HTMLResponse)
    def login_page() -> str:
        challenge = service.issue_challenge()
        return LOGIN_PAGE.format(challenge_id=challenge.challenge_id, nonce=challenge.nonce)

    @app.post("/login")
    def login(body: LoginModel) -> dict:
        try:
            tag = bytes.fromhex(body.hmac_hex)
        except ValueError as exc:
            raise AuthenticationFailed("hmac_hex is not valid hex") from exc
        session = service.authenticate_agent(body.challenge_id, body.session_key_id, tag)
        return {
            "session_token": session.session_token,
            "agent": session.agent,
            "agent_group": session.agent_group,
            "expires_at": session.expires_at,
            "relative_validity_seconds": session.expires_at - session.started_at,
        }

    def session_token(request: Request) -> str:
        header = request.headers.get("Authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise SessionError("missing bearer session token")
        return token.strip()

    @app.get("/api/profile/{field_name}")
    def profile_field(field_name: str, request: Request) -> dict:
        value = service.get_profile_field(session_token(request), field_name)
        return {"field": field_name, "value": value}

    @app.post("/api/purchase", status_code=201)
    def purchase(body: PurchaseModel, request: Request) -> dict:
        record = service.execute_purchase(session_token(request), body.item)
        return {
            "id": record.id,
            "item": record.item,
            "shipping_address": record.shipping_address,
            "card": record.card,
            "phone": record.phone,
            "placed_at": record.placed_at,
            "status": record.status,
        }

    # -- human-facing -----------------------------------------------------------

    @app.put("/api/scopes/{agent_group}", status_code=204, response_class=Response)
    def put_scope(agent_group: str, body: ScopeModel, _: str = Depends(require_human)) -> Response:
        service.configure_scope(agent_group, body.allowed_fields, body.may_purchase)
        return Response(status_code=204)

    @app.get("/api/scopes")
    def get_scopes(_: str = Depends(require_human)) -> dict:
        return {
            group: {
                "allowed_fields": sorted(policy.allowed_fields),
                "may_purchase": policy.may_purchase,
            }
            for group, policy in service.scopes().items()
        }

    @app.post("/api/delegations", status_code=201)
    def create_delegation(body: DelegationModel, _: str = Depends(require_human)) -> dict:
        if delegator is None:
            raise UsageError("delegation proxy not configured")
        try:
            trust = TrustLevel.parse(body.trust)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        try:
            created = delegator.create_delegation(trust, "Websites", purpose=body.purpose)
        except AuthApiError as exc:
            return JSONResponse(
                status_code=exc.status_code,
                content={"error": exc.code, "detail": exc.detail},
            )
        return {**created, "created_at": service.clock.now()}

    @app.get("/api/sessions")
    def sessions(_: str = Depends(require_human)) -> list:
        return service.list_sessions()

    @app.get("/api/purchases")
    def purchases(_: str = Depends(require_human)) -> list:
        return service.list_purchases()

    @app.get("/api/audit")
    def audit(_: str = Depends(require_human)) -> list:
        return service.audit_events()

    @app.get("/api/stats")
    def stats(_: str = Depends(require_human)) -> dict:
        return service.stats()

    if ui_dist is not None and Path(ui_dist).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dist), html=True), name="ui")

    return app


class UsageAuthRequired(Exception):
    pass


def load_profile_seed(path: str | Path) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_key_hex(path: str | Path, entity: str | None = None) -> bytes:
    """Read a distribution key from a bare-hex file or a fixture JSON."""
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        doc = json.loads(text)
    except ValueError:
        return bytes.fromhex(text)
    if entity is None:
        raise ValueError("fixture JSON given but no entity name to look up")
    return bytes.fromhex(doc["entities"][entity]["distribution_key"])


@click.command("website-service")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8471, show_default=True)
@click.option("--auth-url", default="http://127.0.0.1:8470", show_default=True)
@click.option("--entity-name", default="myWebsite", show_default=True)
@click.option("--dist-key-file", required=True, help="Website distribution key (hex file or fixture JSON).")
@click.option("--seed", "seed_path", required=True, help="Profile seed JSON.")
@click.option("--delegator-name", default=None, help="User entity the delegation proxy signs as.")
@click.option("--delegator-key-file", default=None, help="Delegating user's distribution key.")
@click.option("--ui-dist", default=None, help="Static admin UI bundle directory.")
def main(
    host: str,
    port: int,
    auth_url: str,
    entity_name: str,
    dist_key_file: str,
    seed_path: str,
    delegator_name: str | None,
    delegator_key_file: str | None,
    ui_dist: str | None,
) -> None:
    """Run the website service."""
    import uvicorn

    seed = load_profile_seed(seed_path)
    profile = UserProfile(**seed["profile"])
    scope_map = None
    if "scopes" in seed:
        scope_map = {
            group: (frozenset(cfg["allowed_fields"]), cfg.get("may_purchase", False))
            for group, cfg in seed["scopes"].items()
        }
    auth_client = AuthApiClient(
        auth_url, entity_name, load_key_hex(dist_key_file, entity_name)
    )
    delegator = None
    if delegator_name and delegator_key_file:
        delegator = AuthApiClient(
            auth_url, delegator_name, load_key_hex(delegator_key_file, delegator_name)
        )
    service = WebsiteService(auth_client=auth_client, profile=profile, scope_map=scope_map)
    app = create_app(
        service,
        human_users=seed.get("human_users", {}),
        delegator=delegator,
        ui_dist=ui_dist,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
