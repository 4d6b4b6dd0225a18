"""Rendered-image quality review: rubric prompt, score parsing, critics.

Three interchangeable critics share one ``review`` entry point:

* ``VlmCritic`` — sends the rubric plus a base64 PNG to a vision endpoint.
* ``ScriptedCritic`` — replays a fixed score sequence (unit-test harness).
* ``ModelCritic`` — a synthetic reviewer whose latent quality saturates
  toward a target with each round; drives the improvement-ceiling study.
"""

from __future__ import annotations

import base64
import json
import math
import random
from dataclasses import dataclass

from .postprocess import ExtractError, extract_json_block
from .render import RasterImage
from .spec import RarityTier, TemplateKind

DIMENSIONS = ("layout", "consistency", "readability", "completeness", "aesthetics")


@dataclass(frozen=True)
class QualityScores:
    layout: float
    consistency: float
    readability: float
    completeness: float
    aesthetics: float
    comments: str = ""

    @property
    def s_avg(self) -> float:
        return (self.layout + self.consistency + self.readability
                + self.completeness + self.aesthetics) / 5.0

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in DIMENSIONS}
        d["comments"] = self.comments
        return d

    @staticmethod
    def uniform(value: float, comments: str = "") -> "QualityScores":
        return QualityScores(value, value, value, value, value, comments)


class ScoreParseError(Exception):
    def __init__(self, kind: str, dimension: str | None = None):
        self.kind = kind
        self.dimension = dimension
        detail = f"{kind}({dimension})" if dimension else kind
        super().__init__(detail)


class CriticError(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


def build_review_prompt(template: TemplateKind, rarity: RarityTier) -> str:
    return f"""\
You are reviewing a rendered game-UI design: a {template.value.replace('_', ' ')} \
of rarity tier {rarity.value}.

Score it from 1 (unusable) to 10 (shippable) on five dimensions:
- layout: spatial organization, alignment, element overlap
- consistency: stylistic unity across nodes (palette, stroke, typography)
- readability: text legibility and contrast against its background
- completeness: presence of all expected elements for this template
- aesthetics: visual appeal and rarity appropriateness — a {rarity.value}-tier
  design must look the part (border treatment, star count, glow intensity)

Reply with strictly this JSON object and nothing else:
{{"layout": <1-10>, "consistency": <1-10>, "readability": <1-10>, \
"completeness": <1-10>, "aesthetics": <1-10>, "comments": "<one sentence>"}}"""


def parse_scores(reply: str) -> QualityScores:
    """Extract the score object from a critic reply; clamp each to [1,10]."""
    try:
        block = extract_json_block(reply)
        data = json.loads(block)
    except (ExtractError, json.JSONDecodeError):
        raise ScoreParseError("no_json") from None
    if not isinstance(data, dict):
        raise ScoreParseError("no_json")
    values = {}
    for name in DIMENSIONS:
        if name not in data or not isinstance(data[name], (int, float)) \
                or isinstance(data[name], bool) or not math.isfinite(float(data[name])):
            raise ScoreParseError("missing_dimension", name)
        values[name] = min(10.0, max(1.0, float(data[name])))
    comments = data.get("comments", "")
    if not isinstance(comments, str):
        comments = str(comments)
    return QualityScores(comments=comments, **values)


class VlmCritic:
    """Sends rubric + base64 PNG to an OpenAI-compatible vision endpoint."""

    def __init__(self, client, *, max_tokens: int = 500, temperature: float = 0.0):
        self.client = client
        self.max_tokens = max_tokens
        self.temperature = temperature

    def review(self, image: RasterImage, template: TemplateKind,
               rarity: RarityTier) -> QualityScores:
        png_b64 = base64.b64encode(image.to_png_bytes()).decode("ascii")
        messages = [{
            "role": "user",
            "content": [
                {"type": "text", "text": build_review_prompt(template, rarity)},
                {"type": "image_url",
                 "image_url": {"url": f"data:image/png;base64,{png_b64}"}},
            ],
        }]
        reply, _, _ = self.client.complete(messages, max_tokens=self.max_tokens,
                                           temperature=self.temperature)
        return parse_scores(reply)


class ScriptedCritic:
    """Pops pre-arranged scores in order; raises once the script runs dry."""

    def __init__(self, sequence: list[QualityScores]):
        if not sequence:
            raise ValueError("scripted critic needs a nonempty sequence")
        self._queue = list(sequence)
        self.calls = 0

    def review(self, image: RasterImage, template: TemplateKind,
               rarity: RarityTier) -> QualityScores:
        self.calls += 1
        if not self._queue:
            raise CriticError("exhausted", f"no scores left after {self.calls - 1} reviews")
        return self._queue.pop(0)


# offsets keep s_avg equal to the latent quality while giving the five
# dimensions distinct values (so bottom_two has something to pick)
_DIM_OFFSETS = (0.2, 0.1, 0.0, -0.1, -0.2)


class ModelCritic:
    """Synthetic reviewer with saturating latent quality.

    The latent value q starts at ``initial_quality`` and, after each review,
    climbs by ``gain_rate * max(0, target - q)`` plus Gaussian noise — i.e.
    each refinement round closes a fixed fraction of the remaining headroom.
    Designs already at or above ``target`` barely move, which is what makes
    initial quality anti-correlate with improvement.
    """

    def __init__(self, initial_quality: float, *, target: float = 7.5,
                 gain_rate: float = 0.35, noise_sigma: float = 0.05,
                 seed: int = 0):
        self.q = initial_quality
        self.target = target
        self.gain_rate = gain_rate
        self.noise_sigma = noise_sigma
        self._rng = random.Random(seed)
        self.calls = 0

    def current_scores(self) -> QualityScores:
        """Scores for the current latent state, without advancing it."""
        vals = []
        for off in _DIM_OFFSETS:
            noisy = self.q + off + self._rng.gauss(0.0, self.noise_sigma)
            vals.append(min(10.0, max(1.0, noisy)))
        return QualityScores(*vals, comments="synthetic")

    def review(self, image: RasterImage, template: TemplateKind,
               rarity: RarityTier) -> QualityScores:
        self.calls += 1
        scores = self.current_scores()
        # advance after scoring: the gain models the refinement that will
        # happen between this review and the next
        headroom = max(0.0, self.target - self.q)
        self.q = min(10.0, self.q + self.gain_rate * headroom
                     + self._rng.gauss(0.0, self.noise_sigma))
        return scores


def review(image: RasterImage, template: TemplateKind, rarity: RarityTier,
           critic) -> QualityScores:
    """Uniform entry point over any critic kind."""
    return critic.review(image, template, rarity)


def scores_from_dict(data: dict) -> QualityScores:
    vals = {name: min(10.0, max(1.0, float(data[name]))) for name in DIMENSIONS}
    return QualityScores(comments=str(data.get("comments", "")), **vals)
