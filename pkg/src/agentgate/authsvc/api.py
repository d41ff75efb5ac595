"""HTTP + JSON surface of the auth service.

Status mapping: 200/201 success, 401 authentication failure, 403 for
authorization denial, duplicate issuance and unknown key ids (one status
class so key ids cannot be probed), 410 expired, 409 replay/conflict,
400 usage errors.
"""

from __future__ import annotations

import click
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from agentgate.core import CryptoSpec
from agentgate.authsvc.envelope import SignedRequest
from agentgate.authsvc.service import (
    AuthenticationFailure,
    AuthError,
    AuthorizationDenied,
    AuthService,
    ConflictError,
    DelegationTarget,
    DuplicateIssuance,
    KeyExpired,
    ReplayDetected,
    TargetType,
    UnknownKey,
    UsageError,
)

STATUS_BY_ERROR: dict[type[AuthError], int] = {
    AuthenticationFailure: 401,
    AuthorizationDenied: 403,
    DuplicateIssuance: 403,
    UnknownKey: 403,
    KeyExpired: 410,
    ReplayDetected: 409,
    ConflictError: 409,
    UsageError: 400,
}


class EnvelopeModel(BaseModel):
    sender: str
    timestamp: str
    request_nonce: str
    body: str
    signature: str

    def to_signed_request(self) -> SignedRequest:
        try:
            return SignedRequest.from_wire(self.model_dump())
        except (ValueError, KeyError) as exc:
            raise UsageError(f"malformed envelope: {exc}") from exc


class RegisterEntityModel(BaseModel):
    name: str
    group: str
    hmac_algorithm: str = "sha256"
    key_length_bytes: int = 32


class DelegationTargetModel(BaseModel):
    delegatee_group: str
    target_group: str


class PolicyModel(BaseModel):
    requesting_group: str
    target_type: str
    target: str | DelegationTargetModel
    hmac_algorithm: str = "sha256"
    key_length_bytes: int = 32
    relative_validity_seconds: float = Field(gt=0)
    absolute_validity_seconds: float = Field(gt=0)


def create_app(service: AuthService) -> FastAPI:
    app = FastAPI(title="auth-service", docs_url=None, redoc_url=None)

    @app.exception_handler(AuthError)
    def auth_error_handler(_: Request, exc: AuthError) -> JSONResponse:
        status = STATUS_BY_ERROR.get(type(exc), 500)
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": str(exc)}
        )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/entities", status_code=201)
    def register_entity(body: RegisterEntityModel) -> dict:
        try:
            spec = CryptoSpec(body.hmac_algorithm, body.key_length_bytes)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        try:
            entity = service.register_entity(body.name, body.group, spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return {
            "name": entity.name,
            "group": entity.group,
            "distribution_key": entity.distribution_key.hex(),
            "dist_key_absolute_expiration": entity.dist_key_validity.absolute_expiration,
        }

    @app.post("/policies", status_code=201)
    def add_policy(body: PolicyModel) -> dict:
        target: str | DelegationTarget
        if isinstance(body.target, DelegationTargetModel):
            target = DelegationTarget(body.target.delegatee_group, body.target.target_group)
        else:
            target = body.target
        try:
            target_type = TargetType(body.target_type)
            spec = CryptoSpec(body.hmac_algorithm, body.key_length_bytes)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        policy_id = service.add_policy(
            body.requesting_group,
            target_type,
            target,
            crypto=spec,
            relative_validity=body.relative_validity_seconds,
            absolute_validity=body.absolute_validity_seconds,
        )
        return {"policy_id": policy_id}

    @app.post("/delegations", status_code=201)
    def create_delegation(envelope: EnvelopeModel) -> dict:
        key = service.create_delegated_session_key(envelope.to_signed_request())
        # id and validity summary only -- key material never leaves this handler
        return {
            "session_key_id": key.id,
            "expected_owner_groups": key.expected_owner_groups,
            "relative_validity_seconds": key.relative_validity,
            "absolute_expiration": key.absolute_expiration,
        }

    @app.post("/session-keys/{key_id}/request")
    def request_session_key(key_id: int, envelope: EnvelopeModel) -> dict:
        request = envelope.to_signed_request()
        if request.payload().get("id") != key_id:
            raise UsageError("path key id does not match signed body")
        issue = service.request_session_key(request)
        return {
            "id": issue.id,
            "key": issue.key.hex(),
            "expected_owner_groups": issue.expected_owner_groups,
            "prior_owners": [
                {"name": name, "group": group} for name, group in issue.prior_owners
            ],
            "relative_validity_seconds": issue.relative_validity,
            "absolute_expiration": issue.absolute_expiration,
        }

    return app


@click.command("auth-service")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8470, show_default=True)
@click.option("--log-path", default=None, help="Append-only event log (JSON lines).")
@click.option("--clock-skew", default=120.0, show_default=True)
@click.option("--replay-retention", default=600.0, show_default=True)
def main(host: str, port: int, log_path: str | None, clock_skew: float, replay_retention: float) -> None:
    """Run the auth service."""
    import uvicorn

    service = AuthService(
        event_log_path=log_path, clock_skew=clock_skew, replay_retention=replay_retention
    )
    uvicorn.run(create_app(service), host=host, port=port)


if __name__ == "__main__":
    main()
