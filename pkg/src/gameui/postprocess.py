"""Deterministic post-processing of raw LLM design output.

Three phases, applied in this order: repair (color normalization and
geometry clamping), data injection (stat bar widths computed from attribute
values), and rarity enhancement (tier-scaled decorators). Plus the
extraction step that pulls the JSON payload out of surrounding chatter.

Every function is total and pure; skipped injections are reported as
structured JSONL warning log lines, never as failures.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace

from .spec import (
    Color,
    DesignSpec,
    Effect,
    ElementTheme,
    GradientStop,
    Paint,
    RarityTier,
    SpecNode,
    StrokeLayer,
)

logger = logging.getLogger(__name__)


class ExtractError(Exception):
    """No balanced JSON object found in the completion text."""

    def __init__(self, kind: str = "no_json_found"):
        self.kind = kind
        super().__init__(kind)


def extract_json_block(raw: str) -> str:
    """Return the first balanced top-level JSON object in ``raw``.

    Strips code fences and surrounding prose implicitly: scanning starts at
    the first ``{`` and tracks brace depth, honoring string literals and
    escapes.
    """
    start = raw.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(raw)):
            ch = raw[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return raw[start : i + 1]
        start = raw.find("{", start + 1)
    raise ExtractError()


def _warn(op: str, path: str, message: str) -> None:
    logger.warning(json.dumps({"op": op, "path": path, "message": message}))


# ---------------------------------------------------------------------------
# Phase 1: repair

def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def _repair_color(c: Color) -> Color:
    r, g, b, a = c.r, c.g, c.b, c.a
    # Mixed-range RGB is treated as un-normalized 0-255 wholesale; alpha is
    # normalized independently so an LLM's a=1.0 stays opaque.
    if max(r, g, b) > 1.0:
        r, g, b = r / 255.0, g / 255.0, b / 255.0
    if a > 1.0:
        a = a / 255.0
    def clamp6(v: float) -> float:
        return round(min(1.0, max(0.0, v)), 6)
    return Color(clamp6(r), clamp6(g), clamp6(b), clamp6(a))


def _repair_paint(p: Paint) -> Paint:
    if p.kind == "linear_gradient":
        stops = [GradientStop(min(1.0, max(0.0, s.position)), _repair_color(s.color))
                 for s in p.stops]
        stops.sort(key=lambda s: s.position)
        return replace(p, stops=tuple(stops))
    return replace(p, color=_repair_color(p.color))


def _repair_node(node: SpecNode) -> SpecNode:
    return replace(
        node,
        x=float(_round_half_up(node.x)),
        y=float(_round_half_up(node.y)),
        width=float(max(1, _round_half_up(node.width))),
        height=float(max(1, _round_half_up(node.height))),
        font_size=max(1.0, node.font_size),
        fills=tuple(_repair_paint(p) for p in node.fills),
        strokes=tuple(
            StrokeLayer(_repair_paint(s.paint), max(0.0, s.weight)) for s in node.strokes
        ),
        effects=tuple(
            Effect(
                kind=e.kind,
                color=_repair_color(e.color),
                offset_x=0.0 if e.kind == "glow" else e.offset_x,
                offset_y=0.0 if e.kind == "glow" else e.offset_y,
                blur_radius=max(0.0, e.blur_radius),
            )
            for e in node.effects
        ),
        children=tuple(_repair_node(c) for c in node.children),
    )


def repair_spec(spec: DesignSpec) -> DesignSpec:
    """Normalize colors to [0,1] and clamp geometry to positive integers.

    Idempotent; clears every color/geometry validation rule. Colors with any
    RGB channel above 1.0 are rescaled from the 0-255 range wholesale, then
    clamped and canonicalized to 6 decimals.
    """
    return spec.map_root(_repair_node)


# ---------------------------------------------------------------------------
# Phase 2: data injection

@dataclass(frozen=True)
class StatAttribute:
    """A named gauge (HP/ATK/DEF) with its current and maximum value."""

    name: str
    value: float
    max_value: float


def _find_named(root: SpecNode, name: str) -> SpecNode | None:
    for node in root.walk():
        if node.name == name:
            return node
    return None


def inject_stat_bars(spec: DesignSpec, attrs: list[StatAttribute]) -> DesignSpec:
    """Set each ``<name>_bar_fill`` width from its attribute value.

    The fill width is ``round(clamp(value, 0, max) / max * track.width)``;
    fill height and y are matched to the ``<name>_bar_track`` node.
    Attributes without both named nodes are skipped with a warning record.
    """
    root = spec.root
    for attr in attrs:
        key = attr.name.lower()
        track = _find_named(root, f"{key}_bar_track")
        fill = _find_named(root, f"{key}_bar_fill")
        if track is None or fill is None:
            _warn("inject_stat_bars", f"{key}_bar_track/{key}_bar_fill",
                  f"bar nodes for attribute {attr.name!r} not found; skipped")
            continue
        if attr.max_value <= 0:
            _warn("inject_stat_bars", f"{key}_bar_fill",
                  f"attribute {attr.name!r} has nonpositive max_value; skipped")
            continue
        clamped = min(max(attr.value, 0.0), attr.max_value)
        new_width = float(_round_half_up(clamped / attr.max_value * track.width))
        nested = any(c is fill for c in track.walk())
        if nested:
            updated = replace(fill, width=new_width, height=track.height, x=0.0, y=0.0)
        else:
            updated = replace(fill, width=new_width, height=track.height, y=track.y)
        root = _replace_node(root, fill, updated)
    return replace(spec, root=root)


def _replace_node(root: SpecNode, old: SpecNode, new: SpecNode) -> SpecNode:
    if root is old:
        return new
    changed = False
    children = []
    for child in root.children:
        updated = _replace_node(child, old, new)
        changed = changed or updated is not child
        children.append(updated)
    if not changed:
        return root
    return replace(root, children=tuple(children))


# ---------------------------------------------------------------------------
# Phase 3: rarity enhancement

# Gradient endpoints per element theme. The generation prompt advertises the
# same palette so generated specs and injected decorators stay coherent.
ELEMENT_PALETTES: dict[ElementTheme, tuple[Color, Color]] = {
    ElementTheme.FIRE: (Color(1.0, 0.301961, 0.0), Color(1.0, 0.756863, 0.301961)),
    ElementTheme.WATER: (Color(0.0, 0.4, 1.0), Color(0.4, 0.878431, 1.0)),
    ElementTheme.WIND: (Color(0.0, 0.701961, 0.419608), Color(0.701961, 1.0, 0.8)),
    ElementTheme.LIGHT: (Color(1.0, 0.843137, 0.0), Color(1.0, 0.968627, 0.8)),
    ElementTheme.DARK: (Color(0.294118, 0.0, 0.509804), Color(0.101961, 0.101961, 0.180392)),
}

_GRAY = Color(0.501961, 0.501961, 0.501961)
_GOLD = Color(1.0, 0.843137, 0.0)
_GOLD_LIGHT = Color(1.0, 0.933333, 0.6)

STAR_COUNTS = {
    RarityTier.N: 1,
    RarityTier.R: 2,
    RarityTier.SR: 3,
    RarityTier.SSR: 4,
    RarityTier.UR: 5,
}


@dataclass(frozen=True)
class RarityStyle:
    """Decorator set for one tier: border stack, fill upgrade, glow."""

    tier: RarityTier
    star_count: int
    border: tuple[StrokeLayer, ...]
    fill_upgrade: Paint | None
    glow: Effect | None


def _element_gradient(element: ElementTheme, angle: float = 90.0) -> Paint:
    lo, hi = ELEMENT_PALETTES[element]
    return Paint.gradient([(0.0, lo), (1.0, hi)], angle_degrees=angle)


def _gold_gradient() -> Paint:
    return Paint.gradient([(0.0, _GOLD), (1.0, _GOLD_LIGHT)], angle_degrees=90.0)


def rarity_style(tier: RarityTier, element: ElementTheme) -> RarityStyle:
    primary, accent = ELEMENT_PALETTES[element]
    border: tuple[StrokeLayer, ...]
    fill_upgrade: Paint | None = None
    glow: Effect | None = None
    if tier is RarityTier.N:
        border = (StrokeLayer(Paint(kind="solid", color=_GRAY), 1.0),)
    elif tier is RarityTier.R:
        border = (StrokeLayer(Paint(kind="solid", color=primary), 2.0),)
    elif tier is RarityTier.SR:
        border = (StrokeLayer(Paint(kind="solid", color=primary), 2.0),)
        fill_upgrade = _element_gradient(element)
        glow = Effect(kind="glow", color=accent, blur_radius=8.0)
    elif tier is RarityTier.SSR:
        border = (
            StrokeLayer(Paint(kind="solid", color=primary), 3.0),
            StrokeLayer(Paint(kind="solid", color=_GOLD_LIGHT), 1.5),
        )
        fill_upgrade = _element_gradient(element)
        glow = Effect(kind="glow", color=accent, blur_radius=10.0)
    else:  # UR: golden ornate frame, strong glow
        border = (
            StrokeLayer(_gold_gradient(), 4.0),
            StrokeLayer(Paint(kind="solid", color=primary), 2.0),
        )
        fill_upgrade = _element_gradient(element)
        glow = Effect(kind="glow", color=_GOLD, blur_radius=16.0)
    return RarityStyle(tier=tier, star_count=STAR_COUNTS[tier], border=border,
                       fill_upgrade=fill_upgrade, glow=glow)


def _star_nodes(root: SpecNode, count: int, existing: set[str]) -> list[SpecNode]:
    diameter = 16.0 if root.width >= 200 else max(8.0, float(int(root.width) // 8))
    spacing = diameter + 4.0
    stars = []
    for i in range(1, count + 1):
        name = f"rarity_star_{i}"
        if name in existing:
            continue
        stars.append(
            SpecNode(
                node_type="ELLIPSE",
                name=name,
                x=8.0 + (i - 1) * spacing,
                y=8.0,
                width=diameter,
                height=diameter,
                fills=(Paint(kind="solid", color=_GOLD),),
            )
        )
    return stars


def enhance_rarity(spec: DesignSpec, tier: RarityTier, element: ElementTheme) -> DesignSpec:
    """Inject the tier's decorators onto the root frame.

    Star badges are ELLIPSE nodes named ``rarity_star_<i>`` in a row near
    the top edge; existing names are never duplicated. The border stack and
    glow layer are owned by this system and replaced wholesale, which makes
    the operation idempotent; all pre-existing nodes are preserved.
    """
    style = rarity_style(tier, element)
    root = spec.root

    fills = root.fills
    if style.fill_upgrade is not None:
        fills = (style.fill_upgrade,)

    effects = tuple(e for e in root.effects if e.kind != "glow")
    if style.glow is not None:
        effects = effects + (style.glow,)

    existing = {n.name for n in root.walk()}
    children = root.children + tuple(_star_nodes(root, style.star_count, existing))

    root = replace(root, fills=fills, strokes=style.border, effects=effects,
                   children=children)
    return replace(spec, root=root, rarity=tier, element=element)
