"""HTTP surface of the scoring service.

The endpoints and their JSON shapes follow the wire protocol the
decomposition toolkit's HTTP client speaks: POST /score, /embed and
/topk, GET /healthz.  Malformed bodies come back 400, oversized ones
413, and everything model-related returns 503 until the model has
loaded and passed its self-tests.

Model calls are serialised through a lock.  Scoring is CPU-bound and
the models are small; interleaving requests would only add variance to
timings without helping throughput.
"""

from __future__ import annotations

import logging
import os
import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import BUILTIN_MODEL_ID, ModelLoadError, load_model
from .selftest import SelfTestError, run_selftests

log = logging.getLogger("lm_service")

# Hard caps independent of the model's own byte budget.
MAX_BATCH = 256
MAX_TOPK = 10_000


class ScoreRequest(BaseModel):
    context: str
    continuations: list[str]


class EmbedRequest(BaseModel):
    texts: list[str]


class TopkRequest(BaseModel):
    context: str
    k: int = Field(gt=0)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(model_id: str | None = None) -> FastAPI:
    """Build the application and load its model eagerly.

    Loading happens here rather than in a startup hook so that a broken
    configuration fails loudly at construction time.  If the model
    cannot be built or fails a self-test the app still starts, reports
    unhealthy, and answers every model endpoint with 503; that keeps a
    supervisor loop from flapping while still refusing traffic.
    """
    if model_id is None:
        model_id = os.environ.get("MODEL_ID", BUILTIN_MODEL_ID)

    app = FastAPI(title="lm_service", docs_url=None, redoc_url=None)
    app.state.model = None
    app.state.model_id = model_id
    app.state.failure = None
    app.state.selftest_gaps = None
    app.state.lock = threading.Lock()

    try:
        model = load_model(model_id)
        gaps = run_selftests(model)
    except (ModelLoadError, SelfTestError) as exc:
        app.state.failure = f"{type(exc).__name__}: {exc}"
        log.error("model %r unavailable: %s", model_id, app.state.failure)
    else:
        app.state.model = model
        app.state.selftest_gaps = gaps
        log.info(
            "model %r ready; worst self-test gap %.3e",
            model_id,
            max(gaps.values()),
        )

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed request: {exc.errors()[:3]}")

    def ready():
        if app.state.model is None:
            return None, _error(
                503, f"model not ready: {app.state.failure or 'still loading'}"
            )
        return app.state.model, None

    @app.get("/healthz")
    async def healthz():
        model, err = ready()
        if model is None:
            return _error(503, app.state.failure or "model not ready")
        payload = {"status": "ok"}
        payload.update(model.info())
        payload["selftest_max_gap"] = max(app.state.selftest_gaps.values())
        return payload

    @app.post("/score")
    async def score(req: ScoreRequest):
        model, err = ready()
        if err is not None:
            return err
        if len(req.continuations) > MAX_BATCH:
            return _error(
                413, f"{len(req.continuations)} continuations exceeds {MAX_BATCH}"
            )
        ctx_bytes = len(req.context.encode("utf-8"))
        for cont in req.continuations:
            if ctx_bytes + len(cont.encode("utf-8")) > model.max_bytes:
                return _error(
                    413,
                    f"context plus continuation exceeds {model.max_bytes} bytes",
                )
        with app.state.lock:
            values = model.score_many(req.context, req.continuations)
        return {"logprobs_nats": values}

    @app.post("/embed")
    async def embed(req: EmbedRequest):
        model, err = ready()
        if err is not None:
            return err
        if len(req.texts) == 0:
            return _error(400, "texts must be non-empty")
        if len(req.texts) > MAX_BATCH:
            return _error(413, f"{len(req.texts)} texts exceeds {MAX_BATCH}")
        for text in req.texts:
            if len(text.encode("utf-8")) > model.max_bytes:
                return _error(413, f"text exceeds {model.max_bytes} bytes")
        with app.state.lock:
            vectors = [model.embed(t) for t in req.texts]
        return {"vectors": vectors}

    @app.post("/topk")
    async def topk(req: TopkRequest):
        model, err = ready()
        if err is not None:
            return err
        if req.k > MAX_TOPK:
            return _error(413, f"k={req.k} exceeds {MAX_TOPK}")
        if len(req.context.encode("utf-8")) > model.max_bytes:
            return _error(413, f"context exceeds {model.max_bytes} bytes")
        with app.state.lock:
            entries = model.topk(req.context, req.k)
        return {
            "tokens": [t for t, _ in entries],
            "logprobs_nats": [lp for _, lp in entries],
        }

    return app
