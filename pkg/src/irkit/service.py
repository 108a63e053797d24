"""HTTP+JSON judging service.

Endpoints (auth via the X-Auth-Token header; assessor tokens come from the
campaign's assignments.json, the admin token likewise):

    GET  /health                     liveness + campaign shape
    GET  /assignment                 the caller's ordered doc list + progress
    GET  /topic/{topic_id}           title and level descriptions (own topics only)
    GET  /doc/{topic_id}/{doc_id}    sanitized, highlighted document
    POST /judgment                   record a grade; resubmission bumps revision
    GET  /progress                   own progress (assessor) or all (admin)
    POST /export                     admin only; merge + reports; 409 while
                                     incomplete unless {"force": true}

Payloads never carry provenance, assignment tags, or another assessor's
judgments.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Header, HTTPException

from .campaign import CampaignState
from .errors import ValidationError
from .sanitize import clean_document


def _assessor_payload(state: CampaignState, assessor_id: str) -> dict[str, Any]:
    docs = []
    for topic_id, doc_id in state.assigned_pairs(assessor_id):
        grade = state.grade_of(assessor_id, topic_id, doc_id)
        docs.append(
            {
                "topic_id": topic_id,
                "doc_id": doc_id,
                "status": "pending" if grade is None else "judged",
                "grade": grade,
            }
        )
    judged, assigned = state.progress(assessor_id)
    return {
        "assessor_id": assessor_id,
        "docs": docs,
        "progress": {"judged": judged, "assigned": assigned},
    }


def create_app(
    state: CampaignState,
    *,
    export_on_complete: bool = False,
) -> FastAPI:
    app = FastAPI(title="judging service", docs_url=None, redoc_url=None)
    exported = {"done": False}

    def require_assessor(token: str | None) -> str:
        if not token:
            raise HTTPException(401, "missing X-Auth-Token header")
        assessor_id = state.authenticate(token)
        if assessor_id is None:
            raise HTTPException(401, "unknown token")
        return assessor_id

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "topics": len(state.topics),
            "assessors": len(state.assessor_tokens),
        }

    @app.get("/assignment")
    def assignment(x_auth_token: str | None = Header(default=None)) -> dict[str, Any]:
        assessor_id = require_assessor(x_auth_token)
        return _assessor_payload(state, assessor_id)

    @app.get("/topic/{topic_id}")
    def topic(
        topic_id: str, x_auth_token: str | None = Header(default=None)
    ) -> dict[str, Any]:
        assessor_id = require_assessor(x_auth_token)
        if not any(
            a.topic_id == topic_id
            for a in state.assessor_assignments(assessor_id)
        ):
            raise HTTPException(403, "topic not assigned to you")
        t = state.topics[topic_id]
        return {
            "topic_id": t.id,
            "title": t.title,
            "levels": [
                {"grade": grade, "description": desc} for grade, desc in t.levels
            ],
        }

    @app.get("/doc/{topic_id}/{doc_id}")
    def doc(
        topic_id: str,
        doc_id: str,
        x_auth_token: str | None = Header(default=None),
    ) -> dict[str, Any]:
        assessor_id = require_assessor(x_auth_token)
        if not state.is_assigned(assessor_id, topic_id, doc_id):
            raise HTTPException(403, "document not assigned to you")
        topic = state.topics.get(topic_id)
        if topic is None:
            raise HTTPException(404, "unknown topic")
        try:
            raw = state.raw_document(doc_id)
        except ValidationError as exc:
            raise HTTPException(404, str(exc)) from exc
        cleaned = clean_document(doc_id, raw, topic)
        return {
            "topic_id": topic_id,
            "doc_id": doc_id,
            "title": cleaned.title,
            "body": cleaned.body,
            "highlight_terms": list(cleaned.highlight_terms),
            "original_bytes": cleaned.original_bytes,
            "truncated": cleaned.truncated,
            "grade": state.grade_of(assessor_id, topic_id, doc_id),
        }

    @app.post("/judgment")
    def judgment(
        payload: dict[str, Any] = Body(...),
        x_auth_token: str | None = Header(default=None),
    ) -> dict[str, Any]:
        assessor_id = require_assessor(x_auth_token)
        try:
            topic_id = str(payload["topic_id"])
            doc_id = str(payload["doc_id"])
            grade = int(payload["grade"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed judgment payload: {exc}") from exc
        try:
            j = state.submit(assessor_id, topic_id, doc_id, grade)
        except ValidationError as exc:
            raise HTTPException(400, str(exc)) from exc
        except PermissionError as exc:
            raise HTTPException(403, str(exc)) from exc
        judged, assigned = state.progress(assessor_id)
        if export_on_complete and not exported["done"] and state.all_complete():
            exported["done"] = True
            state.export()
        return {
            "topic_id": j.topic_id,
            "doc_id": j.doc_id,
            "grade": j.grade,
            "revision": j.revision,
            "progress": {"judged": judged, "assigned": assigned},
        }

    @app.get("/progress")
    def progress(x_auth_token: str | None = Header(default=None)) -> dict[str, Any]:
        if x_auth_token and state.is_admin(x_auth_token):
            per = {}
            for assessor_id in sorted(state.assessor_tokens):
                judged, assigned = state.progress(assessor_id)
                per[assessor_id] = {"judged": judged, "assigned": assigned}
            return {"assessors": per, "complete": state.all_complete()}
        assessor_id = require_assessor(x_auth_token)
        judged, assigned = state.progress(assessor_id)
        return {"judged": judged, "assigned": assigned}

    @app.post("/export")
    def export(
        payload: dict[str, Any] | None = Body(default=None),
        x_auth_token: str | None = Header(default=None),
    ) -> dict[str, Any]:
        if not x_auth_token or not state.is_admin(x_auth_token):
            raise HTTPException(403, "admin token required")
        force = bool(payload.get("force", False)) if payload else False
        try:
            result = state.export(force=force)
        except ValidationError as exc:
            raise HTTPException(409, str(exc)) from exc
        return {
            "qrels_path": str(result.out_dir / "qrels.txt"),
            "checksum": result.checksum,
            "kappa": {
                t: v for t, v in result.kappa_by_topic.items()
            },
            "noise": {
                "judged": result.noise.total_judged,
                "relevant": result.noise.total_relevant,
                "fraction": result.noise.fraction,
            },
        }

    return app


def load_app(campaign_dir: str | Path, **kwargs: Any) -> FastAPI:
    """Convenience for `uvicorn irkit.service:...` style launches."""
    return create_app(CampaignState.load(Path(campaign_dir)), **kwargs)
