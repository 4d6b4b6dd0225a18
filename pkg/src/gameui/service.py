"""HTTP service over the pipeline.

Routes (JSON bodies unless noted):

    POST /api/generate              -> 202 {"job_id": ...}
    GET  /api/jobs/{job_id}         -> job record
    GET  /api/spec/{job_id}         -> canonical Design Spec JSON
    GET  /api/render/{job_id}?tier= -> PNG bytes
    POST /api/review                -> quality scores for a finished job
    POST /api/refine                -> 202, re-runs the job with reflection on

Jobs run on a bounded worker pool; requests only enqueue and poll. A spec
is served only after it passes validation — a failed job never yields one.
"""

from __future__ import annotations

import os
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .critic import ModelCritic, VlmCritic, review as run_review
from .generator import build_corpus
from .llm import HttpChatClient, LlmEndpoint, MockDesignClient
from .pipeline import PipelineConfig, case_from_dict, case_to_dict, run_job
from .render import RenderConfig, RenderTier, render
from .spec import RarityTier, parse_spec
from .store import JobStore, job_id_for


@dataclass(frozen=True)
class ServiceConfig:
    storage_dir: str = "./jobstore"
    workers: int = 4
    mock: bool = True
    corpus_seed: int = 7
    endpoint: LlmEndpoint | None = None


def endpoint_from_env() -> LlmEndpoint | None:
    base = os.environ.get("GAMEUI_BASE_URL")
    if not base:
        return None
    return LlmEndpoint(
        base_url=base,
        model=os.environ.get("GAMEUI_MODEL", "gpt-4o"),
        api_key=os.environ.get("GAMEUI_API_KEY", ""),
    )


class GenerateRequest(BaseModel):
    case_id: str | None = None
    template: str | None = None
    rarity: str | None = None
    element: str | None = None
    character_name: str | None = None
    reflect: bool = False
    renderer: str = "gradient"


class ReviewRequest(BaseModel):
    job_id: str


class RefineRequest(BaseModel):
    job_id: str
    theta: float = 7.5
    max_iter: int = 2


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="gameui")
    store = JobStore(config.storage_dir)
    executor = ThreadPoolExecutor(max_workers=config.workers)
    futures: dict[str, Future] = {}
    corpus = {c.case_id: c for c in build_corpus(config.corpus_seed)}

    def make_client():
        if config.mock or config.endpoint is None:
            return MockDesignClient(seed=config.corpus_seed)
        return HttpChatClient(config.endpoint)

    def make_critic():
        if not config.mock and config.endpoint is not None:
            return VlmCritic(HttpChatClient(config.endpoint))
        return ModelCritic(6.5, seed=config.corpus_seed)

    app.state.store = store

    @app.post("/api/generate", status_code=202)
    def generate(req: GenerateRequest):
        if req.case_id:
            case = corpus.get(req.case_id)
            if case is None:
                return _error(404, f"unknown case_id {req.case_id!r}")
        else:
            if not (req.template and req.rarity and req.element):
                return _error(422, "need case_id or template+rarity+element")
            try:
                case = case_from_dict({
                    "case_id": f"AD-{abs(hash((req.template, req.rarity, req.element, req.character_name))) % 10_000:04d}",
                    "template": req.template,
                    "rarity": req.rarity.upper(),
                    "element": req.element.capitalize(),
                    "character_name": req.character_name or "Custom",
                    "stats": [],
                })
            except ValueError as exc:
                return _error(422, str(exc))
        try:
            tier = RenderTier(req.renderer)
        except ValueError:
            return _error(422, f"unknown renderer tier {req.renderer!r}")
        pipe = PipelineConfig(tiers=(tier.value,), reflect=req.reflect)
        job_id = job_id_for(case_to_dict(case), pipe.to_dict())
        existing = store.load_job(job_id)
        if existing is None or existing.status not in ("done", "failed"):
            futures[job_id] = executor.submit(
                run_job, store, case, pipe, make_client(), make_critic())
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        record = store.load_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id!r}")
        return record.to_dict()

    @app.get("/api/spec/{job_id}")
    def get_spec(job_id: str):
        record = store.load_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id!r}")
        if record.status != "done" or not record.spec_key:
            return _error(404, f"job {job_id} has no finalized spec "
                               f"(status: {record.status})")
        return Response(content=store.get_bytes(record.spec_key),
                        media_type="application/json")

    @app.get("/api/render/{job_id}")
    def get_render(job_id: str, tier: str = "gradient"):
        record = store.load_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id!r}")
        key = record.render_keys.get(tier)
        if key is None:
            if record.status != "done" or not record.spec_key:
                return _error(404, f"no {tier!r} render for job {job_id}")
            try:
                tier_enum = RenderTier(tier)
            except ValueError:
                return _error(422, f"unknown tier {tier!r}")
            spec = parse_spec(store.get_text(record.spec_key))
            image = render(spec, RenderConfig(tier=tier_enum))
            key = store.put_bytes(image.to_png_bytes())
            record.render_keys[tier] = key
            store.save_job(record)
        return Response(content=store.get_bytes(key), media_type="image/png")

    @app.post("/api/review")
    def post_review(req: ReviewRequest):
        record = store.load_job(req.job_id)
        if record is None:
            return _error(404, f"unknown job {req.job_id!r}")
        if record.status != "done" or not record.spec_key:
            return _error(409, f"job {req.job_id} not finished")
        spec = parse_spec(store.get_text(record.spec_key))
        image = render(spec, RenderConfig(tier=RenderTier.GRADIENT))
        rarity = spec.rarity or RarityTier.N
        scores = run_review(image, spec.template, rarity, make_critic())
        return scores.as_dict() | {"s_avg": scores.s_avg}

    @app.post("/api/refine", status_code=202)
    def post_refine(req: RefineRequest):
        record = store.load_job(req.job_id)
        if record is None:
            return _error(404, f"unknown job {req.job_id!r}")
        case = case_from_dict(record.case)
        pipe = PipelineConfig(
            tiers=tuple(record.config.get("tiers", ["gradient"])),
            reflect=True, theta=req.theta, max_iter=req.max_iter)
        new_id = job_id_for(record.case, pipe.to_dict())
        if store.load_job(new_id) is None:
            futures[new_id] = executor.submit(
                run_job, store, case, pipe, make_client(), make_critic())
        return {"job_id": new_id}

    @app.on_event("shutdown")
    def shutdown():
        # flush: cancel whatever hasn't started, wait for the rest
        for job_id, future in list(futures.items()):
            if future.cancel():
                record = store.load_job(job_id)
                if record is not None and record.status not in ("done", "failed"):
                    record.status = "failed"
                    record.error = "service shutdown before execution"
                    store.save_job(record)
        executor.shutdown(wait=True)

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8750):
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port)
