"""Auto-layout conflict resolution: restack semantics and guarantees."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from gameui.render import auto_layout_resolve, overlapping_sibling_pairs
from gameui.spec import (
    DesignSpec,
    Paint,
    SpecNode,
    TemplateKind,
    serialize_spec,
)
from treegen import clean_spec, conflict_spec


def card(children) -> DesignSpec:
    return DesignSpec(
        root=SpecNode("FRAME", "card", 0, 0, 320, 450, children=tuple(children)),
        template=TemplateKind.CHARACTER_CARD,
    )


def rect(name, x, y, w, h):
    return SpecNode("RECTANGLE", name, x, y, w, h, fills=(Paint.solid(0.5, 0.5, 0.5),))


def test_coincident_siblings_restack_with_default_spacing():
    spec = card([rect("a", 10, 10, 100, 40), rect("b", 10, 10, 100, 40)])
    out = auto_layout_resolve(spec)
    a, b = out.root.children
    assert (a.x, a.y) == (10.0, 10.0)
    assert (b.x, b.y) == (10.0, 54.0)  # 10 + 40 + default 4px spacing
    assert overlapping_sibling_pairs(out) == 0


def test_restack_keeps_original_child_order():
    # "late" sits lower on canvas but stays first in the stack after restack
    spec = card([rect("late", 10, 30, 80, 30), rect("early", 10, 20, 80, 30)])
    out = auto_layout_resolve(spec)
    assert [c.name for c in out.root.children] == ["late", "early"]
    assert out.root.children[0].y < out.root.children[1].y


def test_spacing_uses_median_of_positive_gaps():
    # gaps 10 and 30 -> median 20; the overlap pair contributes no gap
    spec = card([
        rect("a", 10, 10, 100, 40),    # a ends at 50
        rect("b", 10, 60, 100, 40),    # gap 10, ends 100
        rect("c", 10, 130, 100, 40),   # gap 30, ends 170
        rect("d", 10, 150, 100, 40),   # overlaps c
    ])
    out = auto_layout_resolve(spec)
    ys = [c.y for c in out.root.children]
    assert ys == [10.0, 70.0, 130.0, 190.0]  # spacing 20 throughout


def test_left_edges_align_to_min_x():
    spec = card([rect("a", 30, 10, 100, 40), rect("b", 12, 10, 100, 40)])
    out = auto_layout_resolve(spec)
    assert all(c.x == 12.0 for c in out.root.children)


def test_overflowing_child_pulled_back_into_parent():
    spec = card([rect("a", 10, 10, 100, 40), rect("runaway", 10, 500, 100, 40)])
    out = auto_layout_resolve(spec)
    runaway = out.root.children[1]
    assert runaway.y + runaway.height <= 450
    assert overlapping_sibling_pairs(out) == 0


def test_tall_stack_clamps_to_top():
    tall = [rect(f"t{i}", 0, i, 300, 120) for i in range(5)]  # 5*120 + 4*4 > 450
    out = auto_layout_resolve(card(tall))
    assert out.root.children[0].y == 0.0
    assert overlapping_sibling_pairs(out) == 0


def test_conflict_free_spec_passes_through_object_identical(exemplar):
    assert auto_layout_resolve(exemplar) is exemplar


def test_conflict_free_fixture_passes_through(skill_panel):
    out = auto_layout_resolve(skill_panel)
    assert out is skill_panel
    assert serialize_spec(out) == serialize_spec(skill_panel)


def test_nested_conflicts_resolved_independently():
    inner = SpecNode("FRAME", "cluster", 10, 300, 280, 120, children=(
        rect("inner_a", 5, 5, 200, 40), rect("inner_b", 20, 10, 200, 40)))
    spec = card([rect("top", 10, 10, 100, 40), inner])
    out = auto_layout_resolve(spec)
    assert overlapping_sibling_pairs(out) == 0
    cluster = out.root.children[1]
    ia, ib = cluster.children
    assert ia.y + ia.height <= ib.y  # inner pair was restacked too


def test_resolve_only_moves_never_resizes():
    spec = card([rect("a", 10, 10, 100, 40), rect("b", 10, 10, 120, 60)])
    out = auto_layout_resolve(spec)
    for before, after in zip(spec.root.children, out.root.children):
        assert (before.width, before.height) == (after.width, after.height)
        assert before.fills == after.fills
        assert before.name == after.name


def test_zero_overlap_guarantee_over_random_conflict_trees():
    rng = random.Random(991)
    for _ in range(200):
        out = auto_layout_resolve(conflict_spec(rng))
        assert overlapping_sibling_pairs(out) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_resolve_output_is_stable(seed):
    """Resolving a resolved tree changes nothing (output fixed point)."""
    rng = random.Random(seed)
    once = auto_layout_resolve(clean_spec(rng))
    assert serialize_spec(auto_layout_resolve(once)) == serialize_spec(once)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_zero_overlaps_property(seed):
    out = auto_layout_resolve(clean_spec(random.Random(seed)))
    assert overlapping_sibling_pairs(out) == 0
