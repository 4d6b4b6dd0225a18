"""Prompt assembly and the 110-case evaluation corpus.

The generation prompt is built from independent sections (schema, domain
rules, element colors, few-shot exemplar) so ablation arms can drop one
section while leaving the rest byte-identical. The corpus is fully
deterministic per seed: 50 character cards (10 per rarity tier), 30 item
thumbnails, 30 skill panels.
"""

from __future__ import annotations

import importlib.resources
import json
import random
from dataclasses import dataclass, field

from .postprocess import ELEMENT_PALETTES, STAR_COUNTS, StatAttribute
from .spec import (
    DesignSpec,
    ElementTheme,
    RarityTier,
    TemplateKind,
    parse_spec,
    serialize_spec,
)

ABLATION_FLAGS = frozenset({"few_shot", "schema", "rules", "colors"})


@dataclass(frozen=True)
class TestCase:
    case_id: str
    template: TemplateKind
    rarity: RarityTier
    element: ElementTheme
    character_name: str
    stats: tuple[StatAttribute, ...] = ()
    description: str = ""


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str
    few_shot_spec: DesignSpec | None = None
    max_tokens: int = 6000
    temperature: float = 0.7
    case_id: str = ""

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]


def _load_text(name: str) -> str:
    return importlib.resources.files("gameui").joinpath("data", name).read_text()


def load_exemplar() -> DesignSpec:
    """The bundled few-shot exemplar: a complete SR Fire character card."""
    return parse_spec(_load_text("exemplar_card.json"))


_SCHEMA_SECTION = """\
## Design Spec JSON schema
Reply with one JSON object describing a node tree. Every node has:
  type: "FRAME" | "RECTANGLE" | "ELLIPSE" | "TEXT"
  name: string (machine-readable, snake_case)
  x, y: integer position relative to the parent's top-left corner
  width, height: positive integers
  fills: array of paints; strokes: array of {paint, weight}; effects: array
    paint: {"kind": "solid", "color": {r,g,b,a}} with channels in [0,1]
        or {"kind": "linear_gradient", "stops": [{position, color}...], "angle_degrees": number}
  effects: {"kind": "drop_shadow"|"glow", "color", "offset_x", "offset_y", "blur_radius"}
Only FRAME nodes carry "children". Only TEXT nodes carry "characters" and
"font_size". The root must be a FRAME sized exactly to the template canvas:
character_card 320x450, item_thumbnail 96x96, skill_panel 280x360.
Top-level keys besides the node fields: "template", "rarity", "element"."""

_RULES_SECTION = """\
## Domain rules
- Rarity ladder (star count / border): N=1 star, gray 1px; R=2 stars, element
  2px; SR=3 stars, element gradient + glow; SSR=4 stars, dual stroke + glow;
  UR=5 stars, gold gradient + strong glow.
- Rarity stars are ELLIPSE nodes named rarity_star_1, rarity_star_2, ...
- Stat bars are paired nodes: "<stat>_bar_track" (FRAME) containing or
  followed by "<stat>_bar_fill" (RECTANGLE); fill width encodes value/max.
- Character cards need: name text, portrait area, HP/ATK/DEF bars, rarity
  stars, an element badge, and a level indicator.
- Keep sibling nodes non-overlapping and inside their parent frame."""


def _colors_section() -> str:
    lines = ["## Element color system"]
    for theme, (lo, hi) in ELEMENT_PALETTES.items():
        lines.append(
            f"- {theme.value}: base rgb({lo.r:.3f}, {lo.g:.3f}, {lo.b:.3f})"
            f" to accent rgb({hi.r:.3f}, {hi.g:.3f}, {hi.b:.3f})"
        )
    return "\n".join(lines)


def _case_brief(case: TestCase) -> str:
    stats = ", ".join(f"{s.name.upper()} {s.value}/{s.max_value}" for s in case.stats)
    lines = [
        f"Case {case.case_id}: {case.description}",
        f'Template: {case.template.value} (canvas {case.template.canvas[0]}x{case.template.canvas[1]}).',
        f'The design is for "{case.character_name}", {case.element.value} element,'
        f" {case.rarity.value} rarity ({STAR_COUNTS[case.rarity]} stars).",
    ]
    if stats:
        lines.append(f"Stats: {stats}.")
    lines.append("Reply with the complete Design Spec JSON only.")
    return "\n".join(lines)


def build_generation_prompt(case: TestCase,
                            ablation: frozenset[str] = frozenset()) -> PromptBundle:
    """Assemble the generation prompt; ``ablation`` names sections to drop.

    Dropping ``schema`` produces the free-text baseline (no structured
    sections at all): "design it, reply in JSON".
    """
    unknown = set(ablation) - ABLATION_FLAGS
    if unknown:
        raise ValueError(f"unknown ablation flags: {sorted(unknown)}")

    if "schema" in ablation:
        system = ("You are a game UI designer. Design the requested interface "
                  "and reply with a single JSON object describing it.")
        return PromptBundle(system=system, user=_case_brief(case),
                            case_id=case.case_id)

    sections = ["You are a game UI design engine. Produce machine-readable "
                "layout documents, never prose.", _SCHEMA_SECTION]
    if "rules" not in ablation:
        sections.append(_RULES_SECTION)
    if "colors" not in ablation:
        sections.append(_colors_section())
    few_shot = None
    if "few_shot" not in ablation:
        few_shot = load_exemplar()
        sections.append("## Example (SR Fire character card)\n"
                        + serialize_spec(few_shot))
    return PromptBundle(system="\n\n".join(sections), user=_case_brief(case),
                        few_shot_spec=few_shot, case_id=case.case_id)


def generate_spec(bundle: PromptBundle, client) -> tuple[str, float, int]:
    """Run one generation call; returns (raw_text, latency_s, token_count)."""
    return client.complete(bundle.messages(), max_tokens=bundle.max_tokens,
                           temperature=bundle.temperature)


# ---------------------------------------------------------------------------
# Corpus

_TIERS = [RarityTier.N, RarityTier.R, RarityTier.SR, RarityTier.SSR, RarityTier.UR]
_THEMES = [ElementTheme.FIRE, ElementTheme.WATER, ElementTheme.WIND,
           ElementTheme.LIGHT, ElementTheme.DARK]

_ITEM_KINDS = ["Potion", "Elixir", "Scroll", "Gem", "Ore", "Feather",
               "Sigil", "Charm", "Core", "Shard"]
_SKILL_VERBS = ["Strike", "Burst", "Ward", "Nova", "Lance", "Howl",
                "Veil", "Surge", "Brand", "Requiem"]


def _wordlist() -> list[str]:
    words = [w.strip() for w in _load_text("names.txt").splitlines() if w.strip()]
    assert len(words) >= 60, "bundled wordlist too small"
    return words


def build_corpus(seed: int) -> list[TestCase]:
    """110 cases: CC-001..050 (10 per tier), IT-001..030, SP-001..030."""
    rng = random.Random(seed)
    words = _wordlist()
    cases: list[TestCase] = []

    idx = 0
    for tier in _TIERS:
        for i in range(10):
            idx += 1
            theme = _THEMES[(idx - 1) % 5]
            name = f"{rng.choice(words)} {rng.choice(words)}"
            hp = rng.randint(400, 9800)
            atk = rng.randint(40, 980)
            dfn = rng.randint(40, 980)
            cases.append(TestCase(
                case_id=f"CC-{idx:03d}",
                template=TemplateKind.CHARACTER_CARD,
                rarity=tier,
                element=theme,
                character_name=name,
                stats=(StatAttribute("hp", float(hp), 9999.0),
                       StatAttribute("atk", float(atk), 999.0),
                       StatAttribute("def", float(dfn), 999.0)),
                description=f"collectible character card for the hero {name}",
            ))

    for i in range(30):
        theme = _THEMES[i % 5]
        tier = _TIERS[i % 5]
        name = f"{rng.choice(words)} {rng.choice(_ITEM_KINDS)}"
        cases.append(TestCase(
            case_id=f"IT-{i + 1:03d}",
            template=TemplateKind.ITEM_THUMBNAIL,
            rarity=tier,
            element=theme,
            character_name=name,
            description=f"inventory thumbnail for the item {name}",
        ))

    for i in range(30):
        theme = _THEMES[i % 5]
        tier = _TIERS[i % 5]
        name = f"{rng.choice(words)} {rng.choice(_SKILL_VERBS)}"
        cases.append(TestCase(
            case_id=f"SP-{i + 1:03d}",
            template=TemplateKind.SKILL_PANEL,
            rarity=tier,
            element=theme,
            character_name=name,
            description=f"ability panel listing three skills of {name}",
        ))

    assert len(cases) == 110
    return cases


def corpus_as_rows(cases: list[TestCase]) -> list[dict]:
    rows = []
    for c in cases:
        rows.append({
            "case_id": c.case_id,
            "template": c.template.value,
            "rarity": c.rarity.value,
            "element": c.element.value,
            "name": c.character_name,
            "stats": json.dumps([
                {"name": s.name, "value": s.value, "max": s.max_value}
                for s in c.stats
            ]),
        })
    return rows
