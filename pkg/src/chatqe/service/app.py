"""HTTP+JSON API over the chat service, with a server-push event channel.

Auth is a per-participant bearer token (Authorization header, or ?token=
query parameter for EventSource clients).
"""

import json
import queue as queue_module

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from ..errors import ChatQEError, ValidationError
from .state import AuthError, ForbiddenError, NotFoundError, OrderingError

KEEPALIVE_SECONDS = 0.5


class ParticipantSpec(BaseModel):
    name: str
    lang: str


class CreateSessionBody(BaseModel):
    participants: list[ParticipantSpec]


class MessageBody(BaseModel):
    text: str


def _token(request):
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return request.query_params.get("token")


def _session_payload(session):
    return {
        "session_id": session.session_id,
        "created_at": session.created_at,
        "participants": [participant.to_dict() for participant in session.participants],
    }


def _sse(event):
    return f"data: {json.dumps(event, ensure_ascii=False)}\n\n"


def create_app(service, keepalive=KEEPALIVE_SECONDS):
    app = FastAPI(title="bilingual chat relay")

    status_by_error = (
        (NotFoundError, 404),
        (AuthError, 401),
        (ForbiddenError, 403),
        (OrderingError, 409),
        (ValidationError, 400),
    )

    @app.exception_handler(ChatQEError)
    async def handle_error(request, exc):
        for kind, status in status_by_error:
            if isinstance(exc, kind):
                return JSONResponse(status_code=status, content={"error": str(exc)})
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if len(body.participants) != 2:
            raise ValidationError("a session has exactly 2 participants")
        p1, p2 = (spec.model_dump() for spec in body.participants)
        session = service.create_session(p1, p2)
        return _session_payload(session)

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody, request: Request):
        message = service.post_message(session_id, _token(request), body.text)
        return message.to_dict()

    @app.post("/sessions/{session_id}/messages/{message_id}/revision")
    def revise_message(session_id: str, message_id: str, body: MessageBody, request: Request):
        message = service.revise_message(session_id, _token(request), message_id, body.text)
        return message.to_dict()

    @app.get("/sessions/{session_id}/transcript")
    def transcript(session_id: str, request: Request):
        session, messages = service.transcript(session_id, _token(request))
        return {"session_id": session.session_id, "messages": messages}

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, request: Request, from_seq: int = 0):
        raw = request.query_params.get("from")
        if raw is not None:
            try:
                from_seq = int(raw)
            except ValueError:
                raise ValidationError("from must be an integer") from None
        replay, live, detach = service.subscribe(session_id, _token(request), from_seq)

        def stream():
            try:
                for event in replay:
                    yield _sse(event)
                while True:
                    try:
                        yield _sse(live.get(timeout=keepalive))
                    except queue_module.Empty:
                        yield ": keepalive\n\n"
            finally:
                detach()

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def run_server(service, port, host="127.0.0.1"):
    import uvicorn

    uvicorn.run(create_app(service), host=host, port=port, log_level="warning")
