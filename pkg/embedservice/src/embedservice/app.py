"""FastAPI application implementing the embedding wire contract:

POST /embed  {"model": name, "texts": [...]}
             -> {"model": name, "dim": d, "vectors": [[...], ...]}
GET  /health -> {"status": "ok"}
GET  /models -> {"models": [...]}

Errors are JSON {"error": message} with 404 (unknown model),
413 (batch too large), 400 (malformed body).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .registry import ModelRegistry, UnknownModel


class EmbedRequest(BaseModel):
    model: str
    texts: list[str]


def create_app(registry: ModelRegistry) -> FastAPI:
    app = FastAPI(title="embedservice")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": f"malformed body: {exc}"})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def models():
        return {"models": registry.names()}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if not request.texts:
            return JSONResponse(status_code=400, content={"error": "texts is empty"})
        if len(request.texts) > registry.max_batch:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch of {len(request.texts)} exceeds "
                                  f"max_batch={registry.max_batch}"},
            )
        try:
            encoder = registry.get(request.model)
        except UnknownModel:
            return JSONResponse(
                status_code=404,
                content={"error": f"unknown model {request.model!r}"},
            )
        vectors = encoder.encode(request.texts)
        return {
            "model": request.model,
            "dim": int(vectors.shape[1]),
            "vectors": [[float(x) for x in row] for row in vectors],
        }

    return app
