"""Iterative render-review-refine loop with best-result tracking.

One reflection run performs up to K+1 critic evaluations. After each review
the running best is updated (strict improvement only), then the loop stops
on convergence (s_avg >= theta) or budget exhaustion (k == K); otherwise the
two weakest dimensions drive a targeted refinement prompt and the candidate
re-enters the loop through the full post-processing chain. The returned spec
is always the best one observed, so quality never regresses below the
initial review no matter how refinement behaves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .critic import DIMENSIONS, QualityScores
from .llm import LlmError
from .postprocess import (
    ExtractError,
    StatAttribute,
    enhance_rarity,
    extract_json_block,
    inject_stat_bars,
    repair_spec,
)
from .render import RenderConfig, render
from .spec import DesignSpec, ParseError, RarityTier, parse_spec, serialize_spec


@dataclass(frozen=True)
class ReflectionConfig:
    theta: float = 7.5
    max_iter: int = 2  # K: refinement rounds after the initial evaluation
    refine_temperature: float = 0.5
    refine_max_tokens: int = 6000

    def __post_init__(self):
        if not (1.0 < self.theta <= 10.0):
            raise ValueError(f"theta must be in (1, 10], got {self.theta}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass
class IterationRecord:
    k: int
    spec: DesignSpec
    scores: QualityScores
    refine_prompt: str | None = None  # prompt that produced this iteration
    failed: bool = False
    error: str = ""


@dataclass
class ReflectionTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    best_k: int = 0
    best_score: float = 0.0
    stop_reason: str = ""
    critic_calls: int = 0
    refine_calls: int = 0

    def to_json_dict(self) -> dict:
        return {
            "best_k": self.best_k,
            "best_score": self.best_score,
            "stop_reason": self.stop_reason,
            "critic_calls": self.critic_calls,
            "refine_calls": self.refine_calls,
            "iterations": [
                {
                    "k": it.k,
                    "spec": json.loads(serialize_spec(it.spec)),
                    "scores": it.scores.as_dict(),
                    "s_avg": it.scores.s_avg,
                    "refine_prompt": it.refine_prompt,
                    "failed": it.failed,
                    "error": it.error,
                }
                for it in self.iterations
            ],
        }


def bottom_two(scores: QualityScores) -> tuple[str, str]:
    """Two lowest dimensions; ties resolved by the fixed dimension order."""
    ranked = sorted(DIMENSIONS, key=lambda name: getattr(scores, name))
    return ranked[0], ranked[1]


_REPAIR_INSTRUCTIONS = {
    "layout": "Align sibling nodes to a shared grid and remove every overlap "
              "between sibling nodes",
    "consistency": "Unify the palette: derive all accent colors from the "
                   "element color theme",
    "readability": "Increase text contrast ratio > 4.5:1",
    "completeness": "Add missing rarity_stars nodes",
    "aesthetics": "Enrich the rarity decorators: border treatment, glow "
                  "strength and star count must match the tier",
}


def build_refine_prompt(weak: tuple[str, str], scores: QualityScores,
                        spec: DesignSpec) -> str:
    lines = ["A review of your design flagged its two weakest dimensions:"]
    for name in weak:
        lines.append(f"- {name} (scored {getattr(scores, name):.1f}/10): "
                     f"{_REPAIR_INSTRUCTIONS[name]}.")
    if scores.comments:
        lines.append(f"Reviewer comments: {scores.comments}")
    lines.append("")
    lines.append("Repair these problems. Modify only the flagged elements; "
                 "preserve every element that is already correct.")
    lines.append("")
    lines.append("Current design:")
    lines.append("```json")
    lines.append(serialize_spec(spec))
    lines.append("```")
    lines.append("")
    lines.append("Reply with the complete corrected Design Spec JSON only.")
    return "\n".join(lines)


_REFINE_SYSTEM = ("You are a game UI design engine. Apply the requested "
                  "repairs and return the full corrected Design Spec JSON, "
                  "nothing else.")


def _postprocess_candidate(raw: str, base: DesignSpec,
                           attrs: tuple[StatAttribute, ...]) -> DesignSpec:
    block = extract_json_block(raw)
    candidate = repair_spec(parse_spec(block))
    if (candidate.root.width, candidate.root.height) != (base.root.width,
                                                         base.root.height):
        raise ValueError("candidate changed the canvas size")
    if attrs:
        candidate = inject_stat_bars(candidate, list(attrs))
    tier = candidate.rarity or base.rarity
    element = candidate.element or base.element
    if tier is not None and element is not None:
        candidate = enhance_rarity(candidate, tier, element)
    return candidate


def run_reflection(spec0: DesignSpec, config: ReflectionConfig, critic,
                   client, render_config: RenderConfig,
                   attrs: tuple[StatAttribute, ...] = (),
                   ) -> tuple[DesignSpec, ReflectionTrace]:
    """Run the reflection loop; returns (best spec, full trace).

    ``critic`` is any object with review(image, template, rarity);
    ``client`` any chat client (used only for refinement calls). A
    refinement that fails to parse or breaks the canvas consumes an
    iteration slot but no critic call — the loop keeps the previous spec
    and scores and tries again if budget remains.
    """
    trace = ReflectionTrace()
    rarity = spec0.rarity or RarityTier.N
    current = spec0
    best_spec = spec0

    def review_current(k: int, prompt: str | None) -> QualityScores:
        image = render(current, render_config)
        scores = critic.review(image, spec0.template, rarity)
        trace.critic_calls += 1
        trace.iterations.append(IterationRecord(k=k, spec=current,
                                                scores=scores,
                                                refine_prompt=prompt))
        return scores

    k = 0
    scores = review_current(0, None)
    if scores.s_avg > trace.best_score:
        trace.best_score, trace.best_k, best_spec = scores.s_avg, 0, current

    while True:
        if scores.s_avg >= config.theta:
            trace.stop_reason = "converged"
            break
        if k == config.max_iter:
            trace.stop_reason = "budget_exhausted"
            break

        weak = bottom_two(scores)
        prompt = build_refine_prompt(weak, scores, current)
        k += 1
        try:
            raw, _, _ = client.complete(
                [{"role": "system", "content": _REFINE_SYSTEM},
                 {"role": "user", "content": prompt}],
                max_tokens=config.refine_max_tokens,
                temperature=config.refine_temperature,
            )
            trace.refine_calls += 1
            current = _postprocess_candidate(raw, current, attrs)
        except (LlmError, ExtractError, ParseError, ValueError) as exc:
            trace.iterations.append(IterationRecord(
                k=k, spec=current, scores=scores, refine_prompt=prompt,
                failed=True, error=str(exc)))
            continue

        scores = review_current(k, prompt)
        if scores.s_avg > trace.best_score:
            trace.best_score, trace.best_k, best_spec = scores.s_avg, k, current

    return best_spec, trace
