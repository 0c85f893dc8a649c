"""HTTP service over an immutable engine snapshot.

Endpoints mirror the CLI exactly (one ranking code path): /api/health,
/api/search, /api/ask, /api/doc/{id}. Invalid parameters return 400 with
field-level messages; unknown routes and documents return structured 404s.
The service never mutates the corpus, so restarts are idempotent and
concurrent requests are safe.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .corpus import assemble_qa_context, assemble_retrieval_context, record_to_dict
from .geo import GeoPoint
from .hybrid import (
    DEFAULT_ALPHA,
    DEFAULT_K,
    DEFAULT_RADIUS_M,
    Method,
    SearchEngine,
    SearchQuery,
    search_payload,
)
from .reader import answer_question, ask_payload


class AskBody(BaseModel):
    question: str = Field(min_length=1)
    lat: Optional[float] = None
    lon: Optional[float] = None
    radius_m: Optional[float] = None
    alpha: Optional[float] = None


def _field_errors(exc: RequestValidationError) -> list[dict]:
    return [
        {"field": ".".join(str(part) for part in err.get("loc", []) if part != "query"), "message": err.get("msg", "")}
        for err in exc.errors()
    ]


def _point_from(lat: float | None, lon: float | None) -> GeoPoint | None:
    if lat is None and lon is None:
        return None
    if lat is None or lon is None:
        raise HTTPException(400, detail={"field": "lat" if lat is None else "lon", "message": "lat and lon must be supplied together"})
    try:
        return GeoPoint(lat, lon)
    except ValueError as exc:
        raise HTTPException(400, detail={"field": "lat/lon", "message": str(exc)})


def create_app(engine: SearchEngine, static_dir: str | None = None) -> FastAPI:
    """Build the API application around one read-only engine snapshot.

    ``static_dir`` optionally mounts a directory of static files (e.g. the
    explorer UI) at the root; API routes keep precedence and unknown
    /api/* paths still return structured 404s.
    """
    app = FastAPI(title="toposearch", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "invalid parameters", "fields": _field_errors(exc)})

    @app.exception_handler(HTTPException)
    async def http_handler(request: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, (dict, list)) else {"message": exc.detail}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "records": len(engine.records),
            "with_coordinates": len(engine.spatial_index),
            "indexed_documents": len(engine.vector_index),
            "embedder": engine.provider.name,
            "embedding_dim": engine.vector_index.dim,
        }

    @app.get("/api/search")
    def search(
        q: str,
        lat: Optional[float] = None,
        lon: Optional[float] = None,
        radius_m: float = DEFAULT_RADIUS_M,
        alpha: float = DEFAULT_ALPHA,
        k: int = DEFAULT_K,
        method: str = Method.HYBRID.value,
    ):
        try:
            parsed_method = Method(method)
        except ValueError:
            raise HTTPException(400, detail={"field": "method", "message": f"unknown method: {method!r}"})
        point = _point_from(lat, lon)
        try:
            query = SearchQuery(text=q, point=point, radius_m=radius_m, alpha=alpha, k=k, method=parsed_method)
            return search_payload(engine, query)
        except ValueError as exc:
            raise HTTPException(400, detail={"field": "query", "message": str(exc)})

    @app.post("/api/ask")
    def ask(body: AskBody):
        point = _point_from(body.lat, body.lon)
        try:
            result = answer_question(
                engine, body.question, point=point, radius_m=body.radius_m, alpha=body.alpha
            )
        except ValueError as exc:
            raise HTTPException(400, detail={"field": "question", "message": str(exc)})
        return ask_payload(result)

    @app.get("/api/doc/{doc_id}")
    def doc(doc_id: str):
        record = engine.records_by_id.get(doc_id)
        if record is None:
            raise HTTPException(404, detail={"field": "doc_id", "message": f"document not found: {doc_id}"})
        context, _ = assemble_qa_context(record)
        return {
            "record": record_to_dict(record),
            "retrieval_context": assemble_retrieval_context(record),
            "qa_context": context,
        }

    # Registered after the real API routes: unknown /api/* paths get the
    # structured 404 even when a static mount handles everything else.
    @app.api_route("/api/{rest:path}", methods=["GET", "POST"], include_in_schema=False)
    def unknown_api(rest: str):
        raise HTTPException(404, detail={"message": f"unknown API route: /api/{rest}"})

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


def serve(engine: SearchEngine, port: int = 8080, host: str = "127.0.0.1", static_dir: str | None = None) -> None:
    """Run the service until interrupted; port conflicts fail at startup."""
    import uvicorn

    try:
        uvicorn.run(create_app(engine, static_dir=static_dir), host=host, port=port, log_level="info")
    except SystemExit as exc:
        # uvicorn exits itself on startup failure (e.g. the port is busy).
        if exc.code not in (0, None):
            raise OSError(f"could not bind {host}:{port} (is the port in use?)") from exc
