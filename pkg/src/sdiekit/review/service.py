"""HTTP surface for the review loop.

JSON over HTTP: 200/201 on success, 400 for validation problems, 404 for
missing things, 409 for conflicts.  When a token table is configured every
request must carry ``Authorization: Bearer <token>``; otherwise the
reviewer name travels in the query string or request body.
"""

from __future__ import annotations

import json

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .store import ConflictError, NotFoundError, ReviewStore, ValidationError


class CreateProjectRequest(BaseModel):
    name: str
    corpus_ref: str
    vocabulary_version: str | None = None
    members: list[str] = Field(default_factory=list)


class EnqueueRequest(BaseModel):
    corpus_ref: str
    items: list[dict] = Field(default_factory=list)


class LabelRequest(BaseModel):
    label: str
    note: str | None = None
    reviewer: str | None = None


def create_app(store: ReviewStore, tokens: dict[str, str] | None = None) -> FastAPI:
    app = FastAPI(title="sdiekit review service")

    def reviewer_from_auth(authorization: str | None = Header(default=None)) -> str | None:
        if tokens is None:
            return None
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="bearer token required")
        token = authorization.removeprefix("Bearer ").strip()
        if token not in tokens:
            raise HTTPException(status_code=401, detail="unknown token")
        return tokens[token]

    def resolve_reviewer(auth_reviewer: str | None, explicit: str | None) -> str:
        reviewer = auth_reviewer or explicit
        if not reviewer:
            raise HTTPException(status_code=400, detail="reviewer is required")
        return reviewer

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "projects": len(store.list_projects())}

    @app.get("/api/projects")
    def list_projects(_: str | None = Depends(reviewer_from_auth)) -> list[dict]:
        return [p.to_dict() for p in store.list_projects()]

    @app.post("/api/projects", status_code=201)
    def create_project(
        body: CreateProjectRequest, _: str | None = Depends(reviewer_from_auth)
    ) -> dict:
        try:
            project = store.create_project(
                body.name,
                body.corpus_ref,
                vocabulary_version=body.vocabulary_version,
                members=body.members,
            )
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        return project.to_dict()

    @app.post("/api/projects/{project_id}/enqueue")
    def enqueue(
        project_id: str, body: EnqueueRequest, _: str | None = Depends(reviewer_from_auth)
    ) -> dict:
        try:
            added = store.enqueue(project_id, body.corpus_ref, body.items)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"enqueued": added, "queue": store.progress(project_id)}

    @app.get("/api/projects/{project_id}/next")
    def next_item(
        project_id: str,
        reviewer: str | None = Query(default=None),
        auth_reviewer: str | None = Depends(reviewer_from_auth),
    ) -> dict:
        who = resolve_reviewer(auth_reviewer, reviewer)
        try:
            item = store.next_item(project_id, who)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        return {
            "item": None if item is None else item.to_dict(),
            "progress": store.progress(project_id),
        }

    @app.post("/api/projects/{project_id}/events/{event_id}/label")
    def submit_label(
        project_id: str,
        event_id: str,
        body: LabelRequest,
        auth_reviewer: str | None = Depends(reviewer_from_auth),
    ) -> dict:
        who = resolve_reviewer(auth_reviewer, body.reviewer)
        try:
            item = store.submit_label(project_id, event_id, body.label, body.note, who)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"item": item.to_dict(), "progress": store.progress(project_id)}

    @app.get("/api/projects/{project_id}/events/{event_id}/audit")
    def audit(
        project_id: str, event_id: str, _: str | None = Depends(reviewer_from_auth)
    ) -> dict:
        try:
            return {"audit": store.audit_trail(project_id, event_id)}
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))

    @app.get("/api/projects/{project_id}/export")
    def export(
        project_id: str,
        format: str = Query(default="jsonl"),
        _: str | None = Depends(reviewer_from_auth),
    ):
        if format != "jsonl":
            raise HTTPException(status_code=400, detail=f"unsupported format: {format!r}")
        try:
            rows = store.export_labeled(project_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        body = "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    return app
