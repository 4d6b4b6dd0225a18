"""Objective structural metrics computed from the IR without rendering.

Five signals: node count (NC), canvas coverage (COV, overlaps counted
multiply so values above 1 are legal), color diversity (CD, distinct exact
RGB triples over solid fills and gradient stops), text contrast ratio (CR,
WCAG relative-luminance contrast averaged over TEXT nodes), and element
completeness (EC, fraction of the template's required named elements
present by node-name substring match).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .spec import Color, DesignSpec, SpecNode, TemplateKind

# Required-element checklists per template. Each item lists the name
# substrings that count as evidence; an item with min_count > 1 needs that
# many distinct matching nodes.
_CHECKLISTS: dict[TemplateKind, list[tuple[str, tuple[str, ...], int]]] = {
    TemplateKind.CHARACTER_CARD: [
        ("name_text", ("name",), 1),
        ("portrait", ("portrait",), 1),
        ("hp_bar", ("hp",), 1),
        ("atk_bar", ("atk",), 1),
        ("def_bar", ("def",), 1),
        ("rarity_star", ("rarity_star", "star"), 1),
        ("element_badge", ("element",), 1),
        ("level_text", ("level", "lv"), 1),
    ],
    TemplateKind.ITEM_THUMBNAIL: [
        ("icon", ("icon",), 1),
        ("rarity_star", ("rarity_star", "star"), 1),
        ("count_text", ("count",), 1),
    ],
    TemplateKind.SKILL_PANEL: [
        ("title", ("title",), 1),
        ("skill_rows", ("skill",), 3),
        ("cooldown_text", ("cooldown", "cd"), 1),
        ("description", ("desc",), 1),
    ],
}

_CANVAS_BACKGROUND = Color(1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class StructuralProfile:
    node_count: int
    canvas_coverage: float
    color_diversity: int
    text_contrast: float
    element_completeness: float
    # Diagnostics beyond the headline five.
    text_contrast_min: float = 1.0
    text_contrast_defaulted: bool = False
    missing_elements: tuple[str, ...] = field(default=())

    def as_row(self, case_id: str = "") -> dict:
        return {
            "case_id": case_id,
            "nc": self.node_count,
            "cov": self.canvas_coverage,
            "cd": self.color_diversity,
            "cr": self.text_contrast,
            "ec": self.element_completeness,
        }


def _linearize(channel: float) -> float:
    if channel <= 0.03928:
        return channel / 12.92
    return ((channel + 0.055) / 1.055) ** 2.4


def relative_luminance(color: Color) -> float:
    return (0.2126 * _linearize(color.r)
            + 0.7152 * _linearize(color.g)
            + 0.0722 * _linearize(color.b))


def wcag_contrast(fg: Color, bg: Color) -> float:
    """Contrast ratio in [1, 21]; symmetric in its arguments."""
    l1 = relative_luminance(fg)
    l2 = relative_luminance(bg)
    lighter, darker = max(l1, l2), min(l1, l2)
    return (lighter + 0.05) / (darker + 0.05)


def _last_solid_fill(node: SpecNode) -> Color | None:
    # Later fills paint on top, so the effective backdrop is the last one.
    for paint in reversed(node.fills):
        if paint.kind == "solid" and paint.color.a > 0:
            return paint.color
    return None


def _text_color(node: SpecNode) -> Color | None:
    for paint in node.fills:
        if not paint.is_visible():
            continue
        return paint.first_color()
    return None


def _collect_contrasts(node: SpecNode, bg: Color, out: list[float]) -> None:
    own_bg = _last_solid_fill(node)
    effective_bg = own_bg if own_bg is not None else bg
    if node.node_type == "TEXT":
        fg = _text_color(node)
        if fg is not None:
            out.append(wcag_contrast(fg, bg))
    for child in node.children:
        _collect_contrasts(child, effective_bg, out)


def structural_profile(spec: DesignSpec) -> StructuralProfile:
    """Compute the five-metric profile for a repaired spec."""
    nodes = list(spec.root.walk())
    node_count = len(nodes)

    canvas_area = spec.root.width * spec.root.height
    painted = sum(
        n.width * n.height for n in nodes[1:] if n.has_visible_paint()
    )
    coverage = painted / canvas_area if canvas_area > 0 else 0.0

    triples: set[tuple[float, float, float]] = set()
    for node in nodes:
        for paint in node.fills:
            if paint.kind == "solid":
                triples.add(paint.color.rgb())
            else:
                for stop in paint.stops:
                    triples.add(stop.color.rgb())

    contrasts: list[float] = []
    _collect_contrasts(spec.root, _CANVAS_BACKGROUND, contrasts)
    if contrasts:
        text_contrast = sum(contrasts) / len(contrasts)
        contrast_min = min(contrasts)
        defaulted = False
    else:
        text_contrast = 1.0
        contrast_min = 1.0
        defaulted = True

    checklist = _CHECKLISTS[spec.template]
    names = [n.name.lower() for n in nodes]
    missing = []
    for item, needles, min_count in checklist:
        hits = sum(1 for name in names if any(needle in name for needle in needles))
        if hits < min_count:
            missing.append(item)
    completeness = (len(checklist) - len(missing)) / len(checklist)

    return StructuralProfile(
        node_count=node_count,
        canvas_coverage=coverage,
        color_diversity=len(triples),
        text_contrast=text_contrast,
        element_completeness=completeness,
        text_contrast_min=contrast_min,
        text_contrast_defaulted=defaulted,
        missing_elements=tuple(missing),
    )
