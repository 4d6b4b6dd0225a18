"""Deterministic rasterization of a design spec to RGBA pixels.

Three renderer tiers, each a strict feature superset of the previous:

* Flat: solid colors only; gradients collapse to their first stop,
  effects are ignored.
* Gradient: adds per-pixel linear gradients and drop shadows / glows
  (3-pass box blur of the node's alpha silhouette, tinted, composited
  beneath the node).
* LayoutAware: additionally restacks overlapping or overflowing siblings
  before rasterization.

Compositing is integer source-over with 8-bit premultiplication and
round-half-up division, so identical specs produce bit-identical pixels on
every platform. Text uses the embedded 5x7 bitmap font.
"""

from __future__ import annotations

import hashlib
import io
import statistics
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from PIL import Image

from .font5x7 import GLYPH_HEIGHT, GLYPH_WIDTH, glyph_mask
from .spec import Color, DesignSpec, Paint, SpecNode

MAX_CANVAS = 4096


class RenderTier(Enum):
    FLAT = "flat"
    GRADIENT = "gradient"
    LAYOUT_AWARE = "layout"


@dataclass(frozen=True)
class RenderConfig:
    tier: RenderTier = RenderTier.GRADIENT
    scale: int = 1
    background: Color = Color(1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    pixels: bytes  # row-major RGBA, straight alpha

    def pixel(self, x: int, y: int) -> tuple[int, int, int, int]:
        i = (y * self.width + x) * 4
        return tuple(self.pixels[i : i + 4])

    def pixel_sha256(self) -> str:
        return hashlib.sha256(self.pixels).hexdigest()

    def to_png_bytes(self) -> bytes:
        img = Image.frombytes("RGBA", (self.width, self.height), self.pixels)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue()

    def save_png(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_png_bytes())


class RenderError(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


# ---------------------------------------------------------------------------
# Auto-layout resolution

def _boxes(children: tuple[SpecNode, ...]) -> list[tuple[float, float, float, float]]:
    return [(c.x, c.y, c.x + c.width, c.y + c.height) for c in children]


def _pair_overlaps(a, b) -> bool:
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    return ix > 0 and iy > 0


def _frame_conflict(frame: SpecNode) -> bool:
    boxes = _boxes(frame.children)
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if _pair_overlaps(boxes[i], boxes[j]):
                return True
    for x0, y0, x1, y1 in boxes:
        if x0 < 0 or y0 < 0 or x1 > frame.width or y1 > frame.height:
            return True
    return False


def _restack_children(frame: SpecNode) -> SpecNode:
    children = frame.children
    by_y = sorted(children, key=lambda c: c.y)
    gaps = [
        nxt.y - (prev.y + prev.height)
        for prev, nxt in zip(by_y, by_y[1:])
        if nxt.y - (prev.y + prev.height) > 0
    ]
    spacing = max(4, int(statistics.median(gaps) + 0.5)) if gaps else 4
    total_h = sum(c.height for c in children)
    if len(children) > 1:
        # Shrink the spacing when the median-gap stack would overflow the
        # parent; 4px stays the floor even when nothing fits.
        fit = int((frame.height - total_h) // (len(children) - 1))
        spacing = max(4, min(spacing, fit))

    # One shared left edge: the minimum original x, pulled left if a wide
    # child needs the room, never negative.
    left = min(c.x for c in children)
    left = min([left] + [frame.width - c.width for c in children])
    left = max(0.0, left)

    stack_h = total_h + spacing * (len(children) - 1)
    start_y = min(c.y for c in children)
    # Shift the stack up so it fits the parent when possible; never above 0.
    start_y = min(start_y, max(0.0, frame.height - stack_h))
    start_y = max(0.0, start_y)

    y = start_y
    moved = []
    for child in children:
        moved.append(replace(child, x=left, y=y))
        y += child.height + spacing
    return replace(frame, children=tuple(moved))


def _resolve_node(node: SpecNode) -> SpecNode:
    children = tuple(_resolve_node(c) for c in node.children)
    if any(c is not o for c, o in zip(children, node.children)):
        node = replace(node, children=children)
    if node.node_type == "FRAME" and node.children and _frame_conflict(node):
        node = _restack_children(node)
    return node


def auto_layout_resolve(spec: DesignSpec) -> DesignSpec:
    """Restack children of every frame whose children overlap or overflow.

    Conflicted frames get their children re-laid top-to-bottom in original
    order: uniform spacing of max(4px, median original positive vertical
    gap), left edges aligned to the minimum original child x, the whole
    stack clamped into the parent where it fits. Conflict-free frames pass
    through untouched (same objects, byte-identical serialization).
    """
    root = _resolve_node(spec.root)
    if root is spec.root:
        return spec
    return replace(spec, root=root)


def overlapping_sibling_pairs(spec: DesignSpec) -> int:
    """Count overlapping child pairs across all frames (0 post-resolve)."""
    total = 0
    for node in spec.root.walk():
        boxes = _boxes(node.children)
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _pair_overlaps(boxes[i], boxes[j]):
                    total += 1
    return total


# ---------------------------------------------------------------------------
# Rasterization helpers (all integer math unless noted)

def _div255(x: np.ndarray) -> np.ndarray:
    # round-half-up of x/255 for nonnegative integer arrays
    return (2 * x + 255) // 510


def _rhu(v: float) -> int:
    return int(np.floor(v + 0.5))


def _premul_color(color: Color) -> np.ndarray:
    a = color.a
    return np.array(
        [
            _rhu(color.r * a * 255.0),
            _rhu(color.g * a * 255.0),
            _rhu(color.b * a * 255.0),
            _rhu(a * 255.0),
        ],
        dtype=np.int64,
    )


def _composite_over(canvas: np.ndarray, x0: int, y0: int, src: np.ndarray) -> None:
    """Source-over: src is premultiplied int64 (h, w, 4)."""
    h, w = src.shape[:2]
    region = canvas[y0 : y0 + h, x0 : x0 + w]
    alpha = src[:, :, 3:4]
    region[...] = src + _div255(region * (255 - alpha))


def _ellipse_mask(w: int, h: int) -> np.ndarray:
    xs = np.arange(w, dtype=np.int64)
    ys = np.arange(h, dtype=np.int64)
    dx = (2 * xs + 1 - w) * h
    dy = (2 * ys + 1 - h) * w
    lhs = dy[:, None] ** 2 + dx[None, :] ** 2
    return (lhs <= (w * h) ** 2).astype(np.uint8) * 255


def _box_blur_pass(buf: np.ndarray, r: int) -> np.ndarray:
    if r <= 0:
        return buf
    window = 2 * r + 1

    def blur_axis(arr: np.ndarray, axis: int) -> np.ndarray:
        pad = [(0, 0), (0, 0)]
        pad[axis] = (r + 1, r)
        padded = np.pad(arr.astype(np.int64), pad)
        csum = np.cumsum(padded, axis=axis)
        n = arr.shape[axis]
        hi = np.take(csum, np.arange(r + 1 + r, r + 1 + r + n), axis=axis)
        lo = np.take(csum, np.arange(0, n), axis=axis)
        total = hi - lo
        return (2 * total + window) // (2 * window)

    return blur_axis(blur_axis(buf, 1), 0)


def _box_blur3(buf: np.ndarray, r: int) -> np.ndarray:
    for _ in range(3):
        buf = _box_blur_pass(buf, r)
    return buf.astype(np.int64)


def _gradient_field(paint: Paint, w: int, h: int) -> np.ndarray:
    """Premultiplied int64 (h, w, 4) for a linear gradient across a bbox."""
    theta = np.deg2rad(paint.angle_degrees)
    dx, dy = float(np.cos(theta)), float(np.sin(theta))
    xs = (np.arange(w, dtype=np.float64) + 0.5) * dx
    ys = (np.arange(h, dtype=np.float64) + 0.5) * dy
    s = ys[:, None] + xs[None, :]
    corners = [0.0, w * dx, h * dy, w * dx + h * dy]
    smin, smax = min(corners), max(corners)
    if smax - smin < 1e-12:
        t = np.zeros((h, w), dtype=np.float64)
    else:
        t = (s - smin) / (smax - smin)

    stops = paint.stops
    if not stops:
        return np.zeros((h, w, 4), dtype=np.int64)
    positions = np.array([st.position for st in stops], dtype=np.float64)
    out = np.empty((h, w, 4), dtype=np.int64)
    channels = np.array(
        [[st.color.r, st.color.g, st.color.b, st.color.a] for st in stops],
        dtype=np.float64,
    )
    alpha = np.interp(t, positions, channels[:, 3])
    for c in range(3):
        straight = np.interp(t, positions, channels[:, c])
        out[:, :, c] = np.floor(straight * alpha * 255.0 + 0.5).astype(np.int64)
    out[:, :, 3] = np.floor(alpha * 255.0 + 0.5).astype(np.int64)
    return out


def _apply_mask(src: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return _div255(src * mask[:, :, None].astype(np.int64))


class _Raster:
    def __init__(self, spec: DesignSpec, config: RenderConfig):
        self.spec = spec
        self.config = config
        self.scale = config.scale
        self.w = int(spec.root.width) * config.scale
        self.h = int(spec.root.height) * config.scale
        self.effects_on = config.tier is not RenderTier.FLAT
        self.gradients_on = config.tier is not RenderTier.FLAT
        self.canvas = np.zeros((self.h, self.w, 4), dtype=np.int64)
        self.canvas[:, :] = _premul_color(config.background)

    # -- geometry ----------------------------------------------------------

    def _node_rect(self, node: SpecNode, ox: int, oy: int) -> tuple[int, int, int, int]:
        s = self.scale
        x = ox + _rhu(node.x * s)
        y = oy + _rhu(node.y * s)
        return x, y, _rhu(node.width * s), _rhu(node.height * s)

    # -- paint sources -----------------------------------------------------

    def _paint_source(self, paint: Paint, w: int, h: int) -> np.ndarray:
        if paint.kind == "linear_gradient" and self.gradients_on and len(paint.stops) >= 2:
            return _gradient_field(paint, w, h)
        color = paint.first_color()
        src = np.empty((h, w, 4), dtype=np.int64)
        src[:, :] = _premul_color(color)
        return src

    def _shape_mask(self, node: SpecNode, w: int, h: int) -> np.ndarray:
        if node.node_type == "ELLIPSE":
            return _ellipse_mask(w, h)
        if node.node_type == "TEXT":
            return self._text_mask(node, w, h)
        return np.full((h, w), 255, dtype=np.uint8)

    def _stroke_mask(self, node: SpecNode, w: int, h: int, weight_px: int) -> np.ndarray:
        if node.node_type == "ELLIPSE":
            mask = _ellipse_mask(w, h).astype(np.int64)
            iw, ih = w - 2 * weight_px, h - 2 * weight_px
            if iw > 0 and ih > 0:
                inner = np.zeros((h, w), dtype=np.int64)
                inner[weight_px : weight_px + ih, weight_px : weight_px + iw] = (
                    _ellipse_mask(iw, ih)
                )
                mask = np.clip(mask - inner, 0, 255)
            return mask.astype(np.uint8)
        mask = np.full((h, w), 255, dtype=np.uint8)
        iw, ih = w - 2 * weight_px, h - 2 * weight_px
        if iw > 0 and ih > 0:
            mask[weight_px : weight_px + ih, weight_px : weight_px + iw] = 0
        return mask

    def _text_mask(self, node: SpecNode, w: int, h: int) -> np.ndarray:
        mask = np.zeros((h, w), dtype=np.uint8)
        lines = node.characters.split("\n")
        k = max(1, _rhu(node.font_size * self.scale / GLYPH_HEIGHT))
        line_h = GLYPH_HEIGHT * k
        block_h = len(lines) * line_h + (len(lines) - 1) * k
        ty = (h - block_h) // 2
        for li, line in enumerate(lines):
            if not line:
                continue
            n = len(line)
            total_w = n * GLYPH_WIDTH * k + (n - 1) * k
            tx = (w - total_w) // 2
            y0 = ty + li * (line_h + k)
            for ci, ch in enumerate(line):
                gx = tx + ci * (GLYPH_WIDTH + 1) * k
                glyph = np.kron(glyph_mask(ch), np.ones((k, k), dtype=np.uint8)) * 255
                self._blit_mask(mask, glyph, gx, y0)
        return mask

    @staticmethod
    def _blit_mask(dst: np.ndarray, src: np.ndarray, x: int, y: int) -> None:
        h, w = dst.shape
        sh, sw = src.shape
        x0, y0 = max(0, x), max(0, y)
        x1, y1 = min(w, x + sw), min(h, y + sh)
        if x1 <= x0 or y1 <= y0:
            return
        dst[y0:y1, x0:x1] = np.maximum(dst[y0:y1, x0:x1], src[y0 - y : y1 - y, x0 - x : x1 - x])

    # -- node silhouette for shadows ----------------------------------------

    def _silhouette(self, node: SpecNode, w: int, h: int) -> np.ndarray | None:
        has_fill = any(p.is_visible() for p in node.fills)
        visible_strokes = [
            s for s in node.strokes if s.paint.is_visible() and s.weight > 0
        ]
        if not has_fill and not visible_strokes:
            return None
        if has_fill:
            return self._shape_mask(node, w, h)
        sil = np.zeros((h, w), dtype=np.uint8)
        for stroke in visible_strokes:
            wpx = max(1, _rhu(stroke.weight * self.scale))
            sil = np.maximum(sil, self._stroke_mask(node, w, h, wpx))
        return sil

    # -- painting ------------------------------------------------------------

    def _composite_masked(self, x: int, y: int, src: np.ndarray, mask: np.ndarray,
                          clip: tuple[int, int, int, int]) -> None:
        cx0, cy0, cx1, cy1 = clip
        h, w = mask.shape
        x0, y0 = max(x, cx0), max(y, cy0)
        x1, y1 = min(x + w, cx1), min(y + h, cy1)
        if x1 <= x0 or y1 <= y0:
            return
        sub_src = src[y0 - y : y1 - y, x0 - x : x1 - x]
        sub_mask = mask[y0 - y : y1 - y, x0 - x : x1 - x]
        _composite_over(self.canvas, x0, y0, _apply_mask(sub_src, sub_mask))

    def _paint_effects(self, node: SpecNode, x: int, y: int, w: int, h: int,
                       clip: tuple[int, int, int, int]) -> None:
        sil = self._silhouette(node, w, h)
        if sil is None:
            return
        for effect in node.effects:
            r = max(0, _rhu(effect.blur_radius * self.scale))
            margin = 3 * r
            buf = np.zeros((h + 2 * margin, w + 2 * margin), dtype=np.int64)
            buf[margin : margin + h, margin : margin + w] = sil
            blurred = _box_blur3(buf, r)
            src = np.empty((*blurred.shape, 4), dtype=np.int64)
            src[:, :] = _premul_color(effect.color)
            ox = _rhu(effect.offset_x * self.scale)
            oy = _rhu(effect.offset_y * self.scale)
            self._composite_masked(
                x - margin + ox, y - margin + oy, src,
                blurred.astype(np.uint8), clip,
            )

    def _paint_node(self, node: SpecNode, ox: int, oy: int,
                    clip: tuple[int, int, int, int]) -> None:
        x, y, w, h = self._node_rect(node, ox, oy)
        if w <= 0 or h <= 0:
            return

        if self.effects_on and node.effects:
            self._paint_effects(node, x, y, w, h, clip)

        shape = None
        for paint in node.fills:
            if not paint.is_visible():
                continue
            if shape is None:
                shape = self._shape_mask(node, w, h)
            self._composite_masked(x, y, self._paint_source(paint, w, h), shape, clip)

        if node.node_type != "TEXT":
            for stroke in node.strokes:
                if not stroke.paint.is_visible() or stroke.weight <= 0:
                    continue
                wpx = max(1, _rhu(stroke.weight * self.scale))
                mask = self._stroke_mask(node, w, h, wpx)
                self._composite_masked(x, y, self._paint_source(stroke.paint, w, h),
                                       mask, clip)

        if node.children:
            child_clip = clip
            if node.node_type == "FRAME":
                child_clip = (max(clip[0], x), max(clip[1], y),
                              min(clip[2], x + w), min(clip[3], y + h))
                if child_clip[0] >= child_clip[2] or child_clip[1] >= child_clip[3]:
                    return
            for child in node.children:
                self._paint_node(child, x, y, child_clip)

    def run(self) -> RasterImage:
        self._paint_node(self.spec.root, 0, 0, (0, 0, self.w, self.h))
        premul = self.canvas
        alpha = premul[:, :, 3:4]
        straight = np.where(
            alpha > 0,
            (2 * premul[:, :, :3] * 255 + alpha) // (2 * np.maximum(alpha, 1)),
            0,
        )
        out = np.concatenate([straight, alpha], axis=2)
        pixels = np.clip(out, 0, 255).astype(np.uint8).tobytes()
        return RasterImage(width=self.w, height=self.h, pixels=pixels)


def render(spec: DesignSpec, config: RenderConfig) -> RasterImage:
    """Rasterize via painter's algorithm, depth-first pre-order.

    Raises :class:`RenderError` when the scaled canvas exceeds 4096 on
    either side. Identical (spec, config) inputs yield identical bytes.
    """
    if config.scale < 1:
        raise RenderError("bad_scale", f"scale must be >= 1, got {config.scale}")
    w = int(spec.root.width) * config.scale
    h = int(spec.root.height) * config.scale
    if w > MAX_CANVAS or h > MAX_CANVAS:
        raise RenderError("canvas_too_large", f"{w}x{h} exceeds {MAX_CANVAS}")
    if config.tier is RenderTier.LAYOUT_AWARE:
        spec = auto_layout_resolve(spec)
    return _Raster(spec, config).run()
