"""End-to-end job execution: generate, post-process, reflect, render, measure.

A job is content-addressed by its (case, config) pair: re-running the same
job finds the finished record and returns it without touching the LLM
endpoint again. Every intermediate artifact (raw completion, canonical
spec, renders, reflection trace) is persisted as it is produced, so a
failure at any stage leaves the earlier artifacts inspectable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .critic import ModelCritic
from .generator import TestCase, build_generation_prompt
from .llm import EchoChatClient, LlmError
from .metrics import structural_profile
from .postprocess import (
    ExtractError,
    enhance_rarity,
    extract_json_block,
    inject_stat_bars,
    repair_spec,
)
from .reflector import ReflectionConfig, run_reflection
from .render import RenderConfig, RenderError, RenderTier, render
from .spec import ParseError, parse_spec, serialize_spec, validate_spec
from .store import JobRecord, JobStore, job_id_for


@dataclass(frozen=True)
class PipelineConfig:
    tiers: tuple[str, ...] = ("gradient",)
    reflect: bool = False
    theta: float = 7.5
    max_iter: int = 2
    scale: int = 1
    ablation: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "tiers": list(self.tiers), "reflect": self.reflect,
            "theta": self.theta, "max_iter": self.max_iter,
            "scale": self.scale, "ablation": sorted(self.ablation),
        }


def case_to_dict(case: TestCase) -> dict:
    return {
        "case_id": case.case_id,
        "template": case.template.value,
        "rarity": case.rarity.value,
        "element": case.element.value,
        "character_name": case.character_name,
        "stats": [{"name": s.name, "value": s.value, "max_value": s.max_value}
                  for s in case.stats],
        "description": case.description,
    }


def case_from_dict(data: dict) -> TestCase:
    from .postprocess import StatAttribute
    from .spec import ElementTheme, RarityTier, TemplateKind

    return TestCase(
        case_id=data["case_id"],
        template=TemplateKind(data["template"]),
        rarity=RarityTier(data["rarity"]),
        element=ElementTheme(data["element"]),
        character_name=data.get("character_name", data["case_id"]),
        stats=tuple(StatAttribute(s["name"], s["value"], s["max_value"])
                    for s in data.get("stats", [])),
        description=data.get("description", ""),
    )


def run_job(store: JobStore, case: TestCase, config: PipelineConfig,
            client, critic=None, refine_client=None) -> JobRecord:
    """Execute the full pipeline for one case; idempotent per (case, config)."""
    case_dict = case_to_dict(case)
    job_id = job_id_for(case_dict, config.to_dict())
    existing = store.load_job(job_id)
    if existing is not None and existing.status == "done":
        return existing

    record = JobRecord(job_id=job_id, case=case_dict, config=config.to_dict())
    store.save_job(record)

    def fail(stage: str, error: str) -> JobRecord:
        record.status = "failed"
        record.stage = stage
        record.error = error
        store.save_job(record)
        return record

    # generate
    record.status = "generating"
    store.save_job(record)
    bundle = build_generation_prompt(case, frozenset(config.ablation))
    try:
        raw, _, _ = client.complete(bundle.messages(),
                                    max_tokens=bundle.max_tokens,
                                    temperature=bundle.temperature)
    except LlmError as exc:
        return fail("generate", str(exc))
    record.raw_key = store.put_text(raw)
    record.stage = "generate"
    store.save_job(record)

    # extract -> parse -> repair -> inject -> enhance
    try:
        block = extract_json_block(raw)
    except ExtractError as exc:
        return fail("extract", str(exc))
    record.stage = "extract"
    try:
        spec = parse_spec(block)
    except ParseError as exc:
        return fail("parse", str(exc))
    record.stage = "parse"
    spec = repair_spec(spec)
    record.stage = "repair"
    if case.stats:
        spec = inject_stat_bars(spec, list(case.stats))
    record.stage = "inject"
    spec = enhance_rarity(spec, case.rarity, case.element)
    record.stage = "enhance"
    record.spec_key = store.put_text(serialize_spec(spec))
    store.save_job(record)

    # reflection (optional)
    if config.reflect:
        record.status = "refining"
        store.save_job(record)
        reflect_config = ReflectionConfig(theta=config.theta,
                                          max_iter=config.max_iter)
        use_critic = critic if critic is not None else ModelCritic(
            6.2, target=config.theta, seed=int(job_id[:8], 16))
        use_refiner = refine_client if refine_client is not None else EchoChatClient()
        try:
            spec, trace = run_reflection(
                spec, reflect_config, use_critic, use_refiner,
                RenderConfig(tier=RenderTier.FLAT, scale=config.scale),
                attrs=case.stats)
        except Exception as exc:  # critic/render failures surface here
            return fail("reflect", str(exc))
        record.trace_key = store.put_text(json.dumps(trace.to_json_dict(),
                                                     sort_keys=True))
        record.spec_key = store.put_text(serialize_spec(spec))
        record.stage = "reflect"
        store.save_job(record)

    # the spec a job serves must be structurally valid
    violations = validate_spec(spec)
    if violations:
        detail = "; ".join(f"{v.path}: {v.rule}" for v in violations[:5])
        return fail("validate", detail)
    record.stage = "validate"

    # render all requested tiers
    for tier_name in config.tiers:
        tier = RenderTier(tier_name)
        try:
            image = render(spec, RenderConfig(tier=tier, scale=config.scale))
        except RenderError as exc:
            return fail(f"render:{tier_name}", str(exc))
        record.render_keys[tier_name] = store.put_bytes(image.to_png_bytes())
    record.stage = "render"
    store.save_job(record)

    # metrics
    profile = structural_profile(spec)
    record.profile = profile.as_row(case.case_id)
    record.stage = "metrics"
    record.status = "done"
    store.save_job(record)
    return record
