"""Rasterizer: pixel oracles, tier semantics, determinism, golden hashes."""

import pytest

from gameui.spec import (
    Color,
    DesignSpec,
    Effect,
    Paint,
    SpecNode,
    TemplateKind,
)
from gameui.render import (
    MAX_CANVAS,
    RenderConfig,
    RenderError,
    RenderTier,
    render,
)

WHITE = (255, 255, 255, 255)
RED = (255, 0, 0, 255)


def item(children=(), **root_overrides) -> DesignSpec:
    fields = dict(node_type="FRAME", name="canvas", x=0.0, y=0.0,
                  width=96.0, height=96.0, children=tuple(children))
    fields.update(root_overrides)
    return DesignSpec(root=SpecNode(**fields), template=TemplateKind.ITEM_THUMBNAIL)


def flat(spec, **kw):
    return render(spec, RenderConfig(tier=RenderTier.FLAT, **kw))


def gradient(spec, **kw):
    return render(spec, RenderConfig(tier=RenderTier.GRADIENT, **kw))


# ---------------------------------------------------------------------------
# Basic shape oracles

def test_background_fill_when_tree_paints_nothing():
    img = flat(item())
    assert img.width == img.height == 96
    assert img.pixel(0, 0) == WHITE
    assert img.pixel(95, 95) == WHITE


def test_centered_rectangle_pixels():
    rect = SpecNode("RECTANGLE", "r", 32, 32, 32, 32, fills=(Paint.solid(1, 0, 0),))
    img = flat(item((rect,)))
    assert img.pixel(48, 48) == RED
    assert img.pixel(32, 32) == RED          # inclusive top-left corner
    assert img.pixel(63, 63) == RED          # last covered pixel
    assert img.pixel(64, 64) == WHITE        # first pixel outside
    assert img.pixel(8, 8) == WHITE


def test_half_alpha_black_over_white():
    # a = 0.501961 -> 128/255; integer source-over gives exactly 127 gray.
    veil = SpecNode("RECTANGLE", "veil", 0, 0, 96, 96,
                    fills=(Paint.solid(0, 0, 0, a=0.501961),))
    img = flat(item((veil,)))
    assert img.pixel(48, 48) == (127, 127, 127, 255)


def test_fill_stack_composites_in_order():
    node = SpecNode("RECTANGLE", "r", 0, 0, 96, 96,
                    fills=(Paint.solid(0, 0, 1), Paint.solid(1, 0, 0)))
    img = flat(item((node,)))
    assert img.pixel(48, 48) == RED  # last fill paints on top


def test_ellipse_mask_excludes_corners():
    disc = SpecNode("ELLIPSE", "disc", 0, 0, 96, 96, fills=(Paint.solid(1, 0, 0),))
    img = flat(item((disc,)))
    assert img.pixel(48, 48) == RED
    assert img.pixel(0, 0) == WHITE
    assert img.pixel(95, 0) == WHITE
    assert img.pixel(0, 95) == WHITE
    assert img.pixel(95, 95) == WHITE
    assert img.pixel(48, 0) == RED  # on-axis extremes are inside


def test_inside_stroke_band():
    from gameui.spec import StrokeLayer
    node = SpecNode("RECTANGLE", "r", 0, 0, 40, 40,
                    fills=(Paint.solid(0, 0, 1),),
                    strokes=(StrokeLayer(Paint.solid(1, 0, 0), 2.0),))
    img = flat(item((node,)))
    assert img.pixel(0, 0) == RED           # stroke hugs the outer edge
    assert img.pixel(1, 1) == RED
    assert img.pixel(2, 2) == (0, 0, 255, 255)  # interior is fill
    assert img.pixel(39, 39) == RED
    assert img.pixel(40, 40) == WHITE       # stroke never spills outside


def test_frame_clips_children():
    child = SpecNode("RECTANGLE", "inner", 30, 30, 40, 40, fills=(Paint.solid(1, 0, 0),))
    frame = SpecNode("FRAME", "window", 10, 10, 40, 40,
                     fills=(Paint.solid(0, 0, 1),), children=(child,))
    img = flat(item((frame,)))
    assert img.pixel(45, 45) == RED     # inside frame, covered by child
    assert img.pixel(55, 55) == WHITE   # child extent clipped at frame edge
    assert img.pixel(12, 12) == (0, 0, 255, 255)


def test_negative_child_coordinates_clip_at_frame_origin():
    child = SpecNode("RECTANGLE", "inner", -10, -10, 20, 20, fills=(Paint.solid(1, 0, 0),))
    frame = SpecNode("FRAME", "window", 20, 20, 40, 40, children=(child,))
    img = flat(item((frame,)))
    assert img.pixel(20, 20) == RED     # visible 10x10 corner remains
    assert img.pixel(15, 15) == WHITE   # nothing paints before the frame


def test_text_renders_ink_deterministically():
    text = SpecNode("TEXT", "label", 4, 4, 88, 40, fills=(Paint.solid(0, 0, 0),),
                    characters="HP 75", font_size=14.0)
    img1 = flat(item((text,)))
    img2 = flat(item((text,)))
    assert img1.pixels == img2.pixels
    box = [img1.pixel(x, y) for x in range(4, 92) for y in range(4, 44)]
    assert any(px != WHITE for px in box)
    # ink never escapes the node box
    outside = [img1.pixel(x, 60) for x in range(96)]
    assert all(px == WHITE for px in outside)


def test_multiline_text_uses_more_rows():
    def ink_rows(chars):
        node = SpecNode("TEXT", "t", 0, 0, 96, 96, fills=(Paint.solid(0, 0, 0),),
                        characters=chars, font_size=10.0)
        img = flat(item((node,)))
        return {y for y in range(96) for x in range(96) if img.pixel(x, y) != WHITE}
    assert len(ink_rows("AB\nCD")) > len(ink_rows("AB"))


# ---------------------------------------------------------------------------
# Gradients and effects

def test_gradient_horizontal_ramp():
    grad = Paint.gradient([(0.0, Color(0, 0, 0)), (1.0, Color(1, 1, 1))],
                          angle_degrees=0.0)
    node = SpecNode("RECTANGLE", "ramp", 0, 0, 96, 96, fills=(grad,))
    img = gradient(item((node,)))
    left, right = img.pixel(0, 48), img.pixel(95, 48)
    assert left[0] < 8 and right[0] > 247
    assert img.pixel(0, 0) == img.pixel(0, 95)  # vertical isolines at 0 deg


def test_gradient_vertical_ramp():
    grad = Paint.gradient([(0.0, Color(0, 0, 0)), (1.0, Color(1, 1, 1))],
                          angle_degrees=90.0)
    node = SpecNode("RECTANGLE", "ramp", 0, 0, 96, 96, fills=(grad,))
    img = gradient(item((node,)))
    assert img.pixel(48, 0)[0] < 8
    assert img.pixel(48, 95)[0] > 247


def test_flat_tier_collapses_gradient_to_first_stop():
    grad = Paint.gradient([(0.0, Color(1, 0, 0)), (1.0, Color(0, 0, 1))])
    node = SpecNode("RECTANGLE", "ramp", 0, 0, 96, 96, fills=(grad,))
    img = flat(item((node,)))
    assert img.pixel(5, 5) == RED
    assert img.pixel(90, 90) == RED


def test_drop_shadow_paints_beneath_at_offset():
    node = SpecNode("RECTANGLE", "card", 20, 20, 40, 40,
                    fills=(Paint.solid(1, 0, 0),),
                    effects=(Effect("drop_shadow", Color(0, 0, 0, 0.8),
                                    offset_x=8.0, offset_y=8.0, blur_radius=2.0),))
    img = gradient(item((node,)))
    below_right = img.pixel(64, 64)  # outside the node, inside the shadow
    assert below_right != WHITE
    assert img.pixel(40, 40) == RED  # node body unshadowed
    assert flat(item((node,))).pixel(64, 64) == WHITE  # flat ignores effects


def test_glow_halos_all_sides():
    node = SpecNode("RECTANGLE", "gem", 40, 40, 16, 16,
                    fills=(Paint.solid(0, 0, 1),),
                    effects=(Effect("glow", Color(1, 0.843137, 0.0, 1.0),
                                    blur_radius=6.0),))
    img = gradient(item((node,)))
    for probe in [(36, 48), (60, 48), (48, 36), (48, 60)]:
        assert img.pixel(*probe) != WHITE, probe


# ---------------------------------------------------------------------------
# Config, scale, errors

def test_scale_doubles_output():
    rect = SpecNode("RECTANGLE", "r", 32, 32, 32, 32, fills=(Paint.solid(1, 0, 0),))
    img = flat(item((rect,)), scale=2)
    assert (img.width, img.height) == (192, 192)
    assert img.pixel(96, 96) == RED
    assert img.pixel(16, 16) == WHITE


def test_custom_background():
    img = flat(item(), background=Color(0.0, 0.0, 0.0, 1.0))
    assert img.pixel(0, 0) == (0, 0, 0, 255)


@pytest.mark.parametrize("scale", [0, -1])
def test_bad_scale_rejected(scale):
    with pytest.raises(RenderError) as exc:
        flat(item(), scale=scale)
    assert exc.value.kind == "bad_scale"


def test_canvas_too_large():
    wide = DesignSpec(root=SpecNode("FRAME", "w", 0, 0, MAX_CANVAS + 1, 8),
                      template=TemplateKind.ITEM_THUMBNAIL)
    with pytest.raises(RenderError) as exc:
        flat(wide)
    assert exc.value.kind == "canvas_too_large"


def test_canvas_limit_applies_to_scaled_size():
    spec = DesignSpec(root=SpecNode("FRAME", "w", 0, 0, 2100, 8),
                      template=TemplateKind.ITEM_THUMBNAIL)
    flat(spec)  # fine at scale 1
    with pytest.raises(RenderError):
        flat(spec, scale=2)


# ---------------------------------------------------------------------------
# Tier relations, determinism, goldens

def test_flat_equals_gradient_without_gradients_or_effects(skill_panel):
    a = render(skill_panel, RenderConfig(tier=RenderTier.FLAT))
    b = render(skill_panel, RenderConfig(tier=RenderTier.GRADIENT))
    assert a.pixels == b.pixels


def test_gradient_equals_layout_on_conflict_free_spec(exemplar):
    a = render(exemplar, RenderConfig(tier=RenderTier.GRADIENT))
    b = render(exemplar, RenderConfig(tier=RenderTier.LAYOUT_AWARE))
    assert a.pixels == b.pixels


def test_double_render_bit_identical(exemplar):
    for tier in RenderTier:
        cfg = RenderConfig(tier=tier)
        assert render(exemplar, cfg).pixels == render(exemplar, cfg).pixels


def test_golden_hashes(exemplar, skill_panel, goldens):
    from gameui.llm import FixtureChatClient
    from gameui.postprocess import extract_json_block, repair_spec
    from gameui.spec import parse_spec

    raw = (FixtureChatClient.bundled().fixture_dir / "default.txt").read_text()
    fixtures = {
        "exemplar_card": exemplar,
        "skill_panel": skill_panel,
        "item_default": repair_spec(parse_spec(extract_json_block(raw))),
    }
    for label, spec in fixtures.items():
        for tier in RenderTier:
            digest = render(spec, RenderConfig(tier=tier)).pixel_sha256()
            assert digest == goldens[label][tier.value], (label, tier.value)


def test_png_round_trip(exemplar):
    img = render(exemplar, RenderConfig(tier=RenderTier.FLAT))
    data = img.to_png_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    from PIL import Image
    import io
    decoded = Image.open(io.BytesIO(data))
    assert decoded.size == (320, 450)
    assert decoded.tobytes() == img.pixels
