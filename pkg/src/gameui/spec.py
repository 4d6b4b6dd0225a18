"""Design Spec JSON intermediate representation.

A design document is a recursive node tree. Four node types exist: FRAME
(the only one that may hold children), RECTANGLE, ELLIPSE, and TEXT (the
only one that carries characters). Geometry is parent-relative in pixels.

The wire format is a single JSON object: the root node's fields (``type,
name, x, y, width, height, fills, strokes, effects, characters, children``)
plus document-level ``template, rarity, element, metadata`` keys. See
docs/schema.md for the sub-field naming of paints and effects.

All values here are immutable after construction; every operation is a pure
function returning new trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterator

NODE_TYPES = ("FRAME", "RECTANGLE", "ELLIPSE", "TEXT")

# Keys the parser consumes; anything else is preserved in metadata.
_NODE_KEYS = frozenset(
    {"type", "name", "x", "y", "width", "height", "fills", "strokes",
     "effects", "characters", "font_size", "children"}
)
_DOC_KEYS = frozenset({"template", "rarity", "element", "metadata"})

DEFAULT_FONT_SIZE = 12.0


class TemplateKind(Enum):
    """The three supported canvas templates, each with a fixed size."""

    CHARACTER_CARD = "character_card"
    ITEM_THUMBNAIL = "item_thumbnail"
    SKILL_PANEL = "skill_panel"

    @property
    def canvas(self) -> tuple[int, int]:
        return _TEMPLATE_CANVAS[self]


_TEMPLATE_CANVAS = {
    TemplateKind.CHARACTER_CARD: (320, 450),
    TemplateKind.ITEM_THUMBNAIL: (96, 96),
    TemplateKind.SKILL_PANEL: (280, 360),
}


class RarityTier(Enum):
    """Collectible rarity ladder, ascending N < R < SR < SSR < UR."""

    N = "N"
    R = "R"
    SR = "SR"
    SSR = "SSR"
    UR = "UR"

    @property
    def rank(self) -> int:
        return _TIER_ORDER.index(self)

    def __lt__(self, other: "RarityTier") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "RarityTier") -> bool:
        return self.rank <= other.rank


_TIER_ORDER = [RarityTier.N, RarityTier.R, RarityTier.SR, RarityTier.SSR, RarityTier.UR]


class ElementTheme(Enum):
    FIRE = "Fire"
    WATER = "Water"
    WIND = "Wind"
    LIGHT = "Light"
    DARK = "Dark"


@dataclass(frozen=True)
class Color:
    """RGBA with unit-interval channels (post-repair)."""

    r: float
    g: float
    b: float
    a: float = 1.0

    def rgb(self) -> tuple[float, float, float]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class GradientStop:
    position: float
    color: Color


@dataclass(frozen=True)
class Paint:
    """Solid color or linear gradient.

    ``angle_degrees`` orients the gradient axis: 0 = left-to-right,
    90 = top-to-bottom.
    """

    kind: str  # "solid" | "linear_gradient"
    color: Color = Color(0.0, 0.0, 0.0, 1.0)
    stops: tuple[GradientStop, ...] = ()
    angle_degrees: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "stops", tuple(self.stops))

    @staticmethod
    def solid(r: float, g: float, b: float, a: float = 1.0) -> "Paint":
        return Paint(kind="solid", color=Color(r, g, b, a))

    @staticmethod
    def gradient(stops: list[tuple[float, Color]], angle_degrees: float = 90.0) -> "Paint":
        return Paint(
            kind="linear_gradient",
            stops=tuple(GradientStop(p, c) for p, c in stops),
            angle_degrees=angle_degrees,
        )

    def first_color(self) -> Color:
        """Representative solid color: own color, or the first stop's."""
        if self.kind == "linear_gradient" and self.stops:
            return self.stops[0].color
        return self.color

    def is_visible(self) -> bool:
        if self.kind == "linear_gradient":
            return any(s.color.a > 0 for s in self.stops)
        return self.color.a > 0


@dataclass(frozen=True)
class StrokeLayer:
    paint: Paint
    weight: float = 1.0


@dataclass(frozen=True)
class Effect:
    """Drop shadow or glow. A glow is a zero-offset shadow."""

    kind: str  # "drop_shadow" | "glow"
    color: Color = Color(0.0, 0.0, 0.0, 0.5)
    offset_x: float = 0.0
    offset_y: float = 0.0
    blur_radius: float = 0.0


@dataclass(frozen=True)
class SpecNode:
    node_type: str
    name: str
    x: float
    y: float
    width: float
    height: float
    fills: tuple[Paint, ...] = ()
    strokes: tuple[StrokeLayer, ...] = ()
    effects: tuple[Effect, ...] = ()
    characters: str = ""
    font_size: float = DEFAULT_FONT_SIZE
    children: tuple["SpecNode", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "fills", tuple(self.fills))
        object.__setattr__(self, "strokes", tuple(self.strokes))
        object.__setattr__(self, "effects", tuple(self.effects))
        object.__setattr__(self, "children", tuple(self.children))

    def has_visible_paint(self) -> bool:
        return any(p.is_visible() for p in self.fills) or any(
            s.paint.is_visible() for s in self.strokes
        )

    def walk(self) -> Iterator["SpecNode"]:
        """Depth-first pre-order over this node and all descendants."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class DesignSpec:
    root: SpecNode
    template: TemplateKind
    rarity: RarityTier | None = None
    element: ElementTheme | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())

    def map_root(self, fn) -> "DesignSpec":
        return replace(self, root=fn(self.root))


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str


class ParseError(Exception):
    """Raised when candidate JSON cannot become a typed tree.

    ``kind`` is one of ``malformed_json``, ``unknown_node_type``,
    ``missing_required_field``; ``path`` locates the offending value.
    """

    def __init__(self, kind: str, path: str, message: str = ""):
        self.kind = kind
        self.path = path
        super().__init__(f"{kind} at {path}" + (f": {message}" if message else ""))


# ---------------------------------------------------------------------------
# Parsing


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("missing_required_field", path, f"expected a number, got {value!r}")
    return float(value)


def _parse_color(obj: Any) -> Color:
    if not isinstance(obj, dict):
        return Color(0.0, 0.0, 0.0, 1.0)
    def chan(key: str, default: float) -> float:
        v = obj.get(key, default)
        return float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else default
    return Color(chan("r", 0.0), chan("g", 0.0), chan("b", 0.0), chan("a", 1.0))


def _parse_paint(obj: Any, path: str) -> Paint:
    if not isinstance(obj, dict):
        raise ParseError("missing_required_field", path, "paint must be an object")
    kind = str(obj.get("kind", "solid")).lower()
    if kind == "solid":
        return Paint(kind="solid", color=_parse_color(obj.get("color")))
    if kind == "linear_gradient":
        stops = []
        for i, stop in enumerate(obj.get("stops") or []):
            if not isinstance(stop, dict):
                continue
            pos = stop.get("position", 0.0)
            pos = float(pos) if isinstance(pos, (int, float)) and not isinstance(pos, bool) else 0.0
            stops.append(GradientStop(pos, _parse_color(stop.get("color"))))
        angle = obj.get("angle_degrees", 0.0)
        angle = float(angle) if isinstance(angle, (int, float)) and not isinstance(angle, bool) else 0.0
        return Paint(kind="linear_gradient", stops=tuple(stops), angle_degrees=angle)
    raise ParseError("unknown_node_type", f"{path}.kind", f"unsupported paint kind {kind!r}")


def _parse_stroke(obj: Any, path: str) -> StrokeLayer:
    paint = _parse_paint(obj, path)
    weight = 1.0
    if isinstance(obj, dict):
        w = obj.get("weight", 1.0)
        if isinstance(w, (int, float)) and not isinstance(w, bool):
            weight = float(w)
    return StrokeLayer(paint=paint, weight=weight)


def _parse_effect(obj: Any, path: str) -> Effect:
    if not isinstance(obj, dict):
        raise ParseError("missing_required_field", path, "effect must be an object")
    kind = str(obj.get("kind", "drop_shadow")).lower()
    if kind not in ("drop_shadow", "glow"):
        raise ParseError("unknown_node_type", f"{path}.kind", f"unsupported effect kind {kind!r}")
    def num(key: str, default: float) -> float:
        v = obj.get(key, default)
        return float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else default
    return Effect(
        kind=kind,
        color=_parse_color(obj.get("color")),
        offset_x=num("offset_x", 0.0),
        offset_y=num("offset_y", 0.0),
        blur_radius=num("blur_radius", 0.0),
    )


def _parse_node(obj: Any, path: str, extras: dict[str, Any], is_root: bool) -> SpecNode:
    if not isinstance(obj, dict):
        raise ParseError("missing_required_field", path, "node must be an object")

    for key in ("type", "name", "x", "y", "width", "height"):
        if key not in obj:
            raise ParseError("missing_required_field", f"{path}.{key}")

    node_type = str(obj["type"]).upper()
    if node_type not in NODE_TYPES:
        raise ParseError("unknown_node_type", f"{path}.type", f"{obj['type']!r}")

    skip = _NODE_KEYS | (_DOC_KEYS if is_root else frozenset())
    unknown = {k: v for k, v in obj.items() if k not in skip}
    if unknown:
        extras[path] = unknown

    fills = tuple(
        _parse_paint(p, f"{path}.fills[{i}]") for i, p in enumerate(obj.get("fills") or [])
    )
    strokes = tuple(
        _parse_stroke(s, f"{path}.strokes[{i}]") for i, s in enumerate(obj.get("strokes") or [])
    )
    effects = tuple(
        _parse_effect(e, f"{path}.effects[{i}]") for i, e in enumerate(obj.get("effects") or [])
    )
    children = tuple(
        _parse_node(c, f"{path}.children[{i}]", extras, False)
        for i, c in enumerate(obj.get("children") or [])
    )

    font_size = obj.get("font_size", DEFAULT_FONT_SIZE)
    if isinstance(font_size, bool) or not isinstance(font_size, (int, float)):
        font_size = DEFAULT_FONT_SIZE

    return SpecNode(
        node_type=node_type,
        name=str(obj["name"]),
        x=_as_float(obj["x"], f"{path}.x"),
        y=_as_float(obj["y"], f"{path}.y"),
        width=_as_float(obj["width"], f"{path}.width"),
        height=_as_float(obj["height"], f"{path}.height"),
        fills=fills,
        strokes=strokes,
        effects=effects,
        characters=str(obj.get("characters", "") or ""),
        font_size=float(font_size),
        children=children,
    )


def _infer_template(width: float, height: float) -> TemplateKind:
    for kind, (w, h) in _TEMPLATE_CANVAS.items():
        if (width, height) == (w, h):
            return kind
    return TemplateKind.CHARACTER_CARD


def parse_spec(text: str) -> DesignSpec:
    """Parse candidate JSON into a typed tree.

    Unknown fields are preserved in ``metadata`` (node-level extras keyed by
    JSON path under ``metadata["extra_fields"]``) rather than rejected.
    Raises :class:`ParseError` for malformed JSON, unknown node/paint kinds,
    or missing required fields.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("malformed_json", "$", str(exc)) from exc
    if not isinstance(doc, dict):
        raise ParseError("malformed_json", "$", "top-level value must be an object")

    extras: dict[str, Any] = {}
    root = _parse_node(doc, "$", extras, is_root=True)

    metadata: dict[str, Any] = {}
    raw_meta = doc.get("metadata")
    if isinstance(raw_meta, dict):
        metadata.update(raw_meta)
    if extras:
        merged = dict(metadata.get("extra_fields") or {})
        merged.update(extras)
        metadata["extra_fields"] = merged

    template_raw = doc.get("template")
    if isinstance(template_raw, str):
        try:
            template = TemplateKind(template_raw)
        except ValueError:
            raise ParseError("unknown_node_type", "$.template", f"{template_raw!r}")
    else:
        template = _infer_template(root.width, root.height)

    rarity = None
    if isinstance(doc.get("rarity"), str):
        try:
            rarity = RarityTier(doc["rarity"].upper())
        except ValueError:
            rarity = None
    element = None
    if isinstance(doc.get("element"), str):
        try:
            element = ElementTheme(doc["element"].capitalize())
        except ValueError:
            element = None

    return DesignSpec(root=root, template=template, rarity=rarity, element=element,
                      metadata=metadata)


# ---------------------------------------------------------------------------
# Validation

_COLOR_GEOMETRY_RULES = frozenset(
    {"color_out_of_range", "nonpositive_size", "nonintegral_geometry",
     "negative_blur", "glow_with_offset", "gradient_stop_order"}
)


def color_geometry_rules() -> frozenset[str]:
    """Rule ids that repair_spec guarantees to clear."""
    return _COLOR_GEOMETRY_RULES


def _check_color(color: Color, path: str, out: list[Violation]) -> None:
    for ch in (color.r, color.g, color.b, color.a):
        if not (0.0 <= ch <= 1.0):
            out.append(Violation(path, "color_out_of_range",
                                 f"channel {ch} outside [0,1]"))
            return


def _check_paint(paint: Paint, path: str, out: list[Violation]) -> None:
    if paint.kind == "solid":
        _check_color(paint.color, f"{path}.color", out)
        return
    if len(paint.stops) < 2:
        out.append(Violation(path, "gradient_too_few_stops",
                             f"gradient has {len(paint.stops)} stop(s), needs >= 2"))
    prev = 0.0
    ordered = True
    for i, stop in enumerate(paint.stops):
        if not (0.0 <= stop.position <= 1.0) or stop.position < prev:
            ordered = False
        prev = max(prev, stop.position)
        _check_color(stop.color, f"{path}.stops[{i}].color", out)
    if not ordered:
        out.append(Violation(path, "gradient_stop_order",
                             "stop positions must be nondecreasing in [0,1]"))


def _validate_node(node: SpecNode, path: str, out: list[Violation]) -> None:
    if node.node_type not in NODE_TYPES:
        out.append(Violation(path, "unknown_node_type", node.node_type))
    if node.width < 1 or node.height < 1:
        out.append(Violation(path, "nonpositive_size",
                             f"{node.width}x{node.height}"))
    for v in (node.x, node.y, node.width, node.height):
        if float(v) != int(v):
            out.append(Violation(path, "nonintegral_geometry", f"{v}"))
            break
    if node.children and node.node_type != "FRAME":
        out.append(Violation(path, "children_on_non_frame", node.node_type))
    if node.characters and node.node_type != "TEXT":
        out.append(Violation(path, "characters_on_non_text", node.node_type))
    if node.node_type == "TEXT" and not node.characters:
        out.append(Violation(path, "empty_text", node.name))
    for i, paint in enumerate(node.fills):
        _check_paint(paint, f"{path}.fills[{i}]", out)
    for i, stroke in enumerate(node.strokes):
        _check_paint(stroke.paint, f"{path}.strokes[{i}]", out)
    for i, eff in enumerate(node.effects):
        if eff.blur_radius < 0:
            out.append(Violation(f"{path}.effects[{i}]", "negative_blur",
                                 f"{eff.blur_radius}"))
        if eff.kind == "glow" and (eff.offset_x != 0 or eff.offset_y != 0):
            out.append(Violation(f"{path}.effects[{i}]", "glow_with_offset",
                                 f"({eff.offset_x}, {eff.offset_y})"))
        _check_color(eff.color, f"{path}.effects[{i}].color", out)
    for i, child in enumerate(node.children):
        _validate_node(child, f"{path}.children[{i}]", out)


def validate_spec(spec: DesignSpec) -> list[Violation]:
    """Check every structural invariant; violations are data, not failures."""
    out: list[Violation] = []
    if spec.root.node_type != "FRAME":
        out.append(Violation("$", "root_not_frame", spec.root.node_type))
    canvas = spec.template.canvas
    if (spec.root.width, spec.root.height) != canvas:
        out.append(Violation("$", "canvas_mismatch",
                             f"root {spec.root.width}x{spec.root.height} vs "
                             f"template {canvas[0]}x{canvas[1]}"))
    _validate_node(spec.root, "$", out)
    return out


# ---------------------------------------------------------------------------
# Serialization

def _fmt_float(v: float) -> str:
    """Canonical float text: <= 6 decimals, at least one decimal digit."""
    s = f"{v:.6f}".rstrip("0")
    if s.endswith("."):
        s += "0"
    if s == "-0.0":
        s = "0.0"
    return s


def _fmt_geometry(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else _fmt_float(v)


def _emit_color(c: Color) -> str:
    return ('{"r":%s,"g":%s,"b":%s,"a":%s}'
            % (_fmt_float(c.r), _fmt_float(c.g), _fmt_float(c.b), _fmt_float(c.a)))


def _emit_paint(p: Paint) -> str:
    if p.kind == "linear_gradient":
        stops = ",".join(
            '{"position":%s,"color":%s}' % (_fmt_float(s.position), _emit_color(s.color))
            for s in p.stops
        )
        return ('{"kind":"linear_gradient","angle_degrees":%s,"stops":[%s]}'
                % (_fmt_float(p.angle_degrees), stops))
    return '{"kind":"solid","color":%s}' % _emit_color(p.color)


def _emit_stroke(s: StrokeLayer) -> str:
    inner = _emit_paint(s.paint)
    return inner[:-1] + ',"weight":%s}' % _fmt_float(s.weight)


def _emit_effect(e: Effect) -> str:
    return ('{"kind":%s,"color":%s,"offset_x":%s,"offset_y":%s,"blur_radius":%s}'
            % (json.dumps(e.kind), _emit_color(e.color), _fmt_float(e.offset_x),
               _fmt_float(e.offset_y), _fmt_float(e.blur_radius)))


def _emit_node(node: SpecNode, doc_suffix: str = "") -> str:
    parts = [
        '"type":%s' % json.dumps(node.node_type),
        '"name":%s' % json.dumps(node.name, ensure_ascii=False),
        '"x":%s' % _fmt_geometry(node.x),
        '"y":%s' % _fmt_geometry(node.y),
        '"width":%s' % _fmt_geometry(node.width),
        '"height":%s' % _fmt_geometry(node.height),
        '"fills":[%s]' % ",".join(_emit_paint(p) for p in node.fills),
        '"strokes":[%s]' % ",".join(_emit_stroke(s) for s in node.strokes),
        '"effects":[%s]' % ",".join(_emit_effect(e) for e in node.effects),
    ]
    if node.node_type == "TEXT":
        parts.append('"characters":%s' % json.dumps(node.characters, ensure_ascii=False))
        parts.append('"font_size":%s' % _fmt_float(node.font_size))
    if node.node_type == "FRAME":
        parts.append('"children":[%s]' % ",".join(_emit_node(c) for c in node.children))
    return "{" + ",".join(parts) + doc_suffix + "}"


def serialize_spec(spec: DesignSpec) -> str:
    """Canonical JSON: fixed key order, <= 6 decimal digits on floats.

    Serializing twice yields identical bytes, and
    ``parse_spec(serialize_spec(s))`` is structurally equal to ``s``.
    """
    doc_parts = ['"template":%s' % json.dumps(spec.template.value)]
    if spec.rarity is not None:
        doc_parts.append('"rarity":%s' % json.dumps(spec.rarity.value))
    if spec.element is not None:
        doc_parts.append('"element":%s' % json.dumps(spec.element.value))
    if spec.metadata:
        doc_parts.append('"metadata":%s' % json.dumps(
            spec.metadata, sort_keys=True, ensure_ascii=False, separators=(",", ":")))
    return _emit_node(spec.root, "," + ",".join(doc_parts))
