"""Reflection loop: hand-traced trajectories, prompts, non-regression."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gameui.critic import QualityScores, ScriptedCritic
from gameui.llm import EchoChatClient, ScriptedChatClient
from gameui.postprocess import StatAttribute
from gameui.reflector import (
    ReflectionConfig,
    bottom_two,
    build_refine_prompt,
    run_reflection,
)
from gameui.render import RenderConfig, RenderTier
from gameui.spec import (
    Color,
    DesignSpec,
    ElementTheme,
    Paint,
    RarityTier,
    SpecNode,
    TemplateKind,
    serialize_spec,
)

FLAT = RenderConfig(tier=RenderTier.FLAT)


def tiny_spec() -> DesignSpec:
    root = SpecNode("FRAME", "item_thumbnail", 0, 0, 96, 96,
                    fills=(Paint.solid(0.1, 0.1, 0.2),))
    return DesignSpec(root=root, template=TemplateKind.ITEM_THUMBNAIL,
                      rarity=RarityTier.N, element=ElementTheme.FIRE)


def scripted(*values):
    return ScriptedCritic([QualityScores.uniform(v) for v in values])


def reflect(spec, critic, client=None, theta=7.5, k=2, attrs=()):
    config = ReflectionConfig(theta=theta, max_iter=k)
    return run_reflection(spec, config, critic, client or EchoChatClient(),
                          FLAT, attrs=attrs)


# ---------------------------------------------------------------------------
# Hand-traced trajectories

def test_trajectory_improving_until_convergence():
    # scores 5.0 -> 6.5 -> 8.0 with theta 7.5: converges on the third review
    critic = scripted(5.0, 6.5, 8.0)
    best, trace = reflect(tiny_spec(), critic)
    assert trace.critic_calls == 3
    assert trace.refine_calls == 2
    assert trace.best_k == 2
    assert trace.best_score == pytest.approx(8.0)
    assert trace.stop_reason == "converged"
    assert [it.k for it in trace.iterations] == [0, 1, 2]
    assert trace.iterations[0].refine_prompt is None
    assert all(it.refine_prompt for it in trace.iterations[1:])
    assert serialize_spec(best) == serialize_spec(trace.iterations[2].spec)


def test_trajectory_good_enough_immediately_skips_refinement():
    spec = tiny_spec()
    critic = scripted(7.8)
    best, trace = reflect(spec, critic)
    assert trace.critic_calls == 1
    assert trace.refine_calls == 0
    assert trace.best_k == 0
    assert trace.best_score == pytest.approx(7.8)
    assert trace.stop_reason == "converged"
    assert best is spec


def test_trajectory_regressing_returns_initial_spec():
    # scores 6.0 -> 5.5 -> 5.8: every refinement made it worse
    spec = tiny_spec()
    critic = scripted(6.0, 5.5, 5.8)
    best, trace = reflect(spec, critic)
    assert trace.critic_calls == 3
    assert trace.refine_calls == 2
    assert trace.best_k == 0
    assert trace.best_score == pytest.approx(6.0)
    assert trace.stop_reason == "budget_exhausted"
    assert best is spec


def test_zero_budget_means_single_review():
    spec = tiny_spec()
    best, trace = reflect(spec, scripted(4.0), k=0)
    assert trace.critic_calls == 1
    assert trace.refine_calls == 0
    assert trace.stop_reason == "budget_exhausted"
    assert best is spec


def test_failed_refinements_consume_iterations_not_critic_calls():
    client = ScriptedChatClient(["no json at all", "still no json"])
    best, trace = reflect(tiny_spec(), scripted(5.0), client=client)
    assert trace.critic_calls == 1
    assert trace.refine_calls == 2  # both calls returned text, neither parsed
    assert [it.failed for it in trace.iterations] == [False, True, True]
    assert trace.stop_reason == "budget_exhausted"
    assert trace.best_k == 0


def test_client_error_does_not_count_as_refine_call():
    client = ScriptedChatClient([])  # raises transport error immediately
    best, trace = reflect(tiny_spec(), scripted(5.0), client=client)
    assert trace.critic_calls == 1
    assert trace.refine_calls == 0
    assert [it.failed for it in trace.iterations] == [False, True, True]


def test_candidate_changing_canvas_is_rejected():
    other = tiny_spec()
    bigger = serialize_spec(DesignSpec(
        root=SpecNode("FRAME", "card", 0, 0, 320, 450,
                      fills=(Paint.solid(0, 0, 0),)),
        template=TemplateKind.CHARACTER_CARD))
    client = ScriptedChatClient([bigger, bigger])
    best, trace = reflect(other, scripted(5.0), client=client)
    failed = [it for it in trace.iterations if it.failed]
    assert len(failed) == 2
    assert "canvas" in failed[0].error
    assert best is other


def test_refined_candidate_flows_through_stat_injection(exemplar):
    # the echoed spec re-enters through repair + injection, so the fill
    # width must encode the attribute, not whatever the reply contained
    attrs = (StatAttribute("hp", 75.0, 100.0),)
    critic = scripted(5.0, 9.0)
    best, trace = reflect(exemplar, critic, attrs=attrs)
    assert trace.best_k == 1
    fills = [n for n in best.root.walk() if n.name == "hp_bar_fill"]
    assert fills[0].width == 135.0  # 0.75 * 180px track


def test_trace_serializes_to_plain_json():
    _, trace = reflect(tiny_spec(), scripted(5.0, 8.0))
    data = trace.to_json_dict()
    assert data["best_k"] == 1
    assert data["stop_reason"] == "converged"
    assert len(data["iterations"]) == 2
    record = data["iterations"][1]
    assert set(record) == {"k", "spec", "scores", "s_avg", "refine_prompt",
                           "failed", "error"}
    assert record["spec"]["type"] == "FRAME"
    import json
    json.dumps(data)  # must be JSON-clean throughout


# ---------------------------------------------------------------------------
# Weak-dimension selection

def make_scores(layout, consistency, readability, completeness, aesthetics):
    return QualityScores(layout, consistency, readability, completeness,
                         aesthetics)


@pytest.mark.parametrize("values, expected", [
    ((8.1, 8.9, 7.9, 7.1, 8.1), ("completeness", "readability")),
    ((5.0, 5.0, 5.0, 5.0, 5.0), ("layout", "consistency")),
    ((1.0, 10.0, 10.0, 10.0, 10.0), ("layout", "consistency")),
    ((9.0, 2.0, 9.0, 9.0, 1.0), ("aesthetics", "consistency")),
])
def test_bottom_two_selection(values, expected):
    assert bottom_two(make_scores(*values)) == expected


# ---------------------------------------------------------------------------
# Refinement prompt

def test_refine_prompt_contents(exemplar):
    scores = make_scores(8.0, 7.0, 4.5, 5.5, 7.5)
    weak = bottom_two(scores)
    assert weak == ("readability", "completeness")
    prompt = build_refine_prompt(weak, scores, exemplar)
    assert "- readability (scored 4.5/10): Increase text contrast ratio" \
           " > 4.5:1." in prompt
    assert "- completeness (scored 5.5/10): Add missing rarity_stars" \
           " nodes." in prompt
    assert "Modify only the flagged elements; preserve every element that " \
           "is already correct." in prompt
    assert serialize_spec(exemplar) in prompt
    assert prompt.endswith("Reply with the complete corrected Design Spec JSON only.")


def test_refine_prompt_includes_reviewer_comments():
    scores = QualityScores.uniform(5.0, comments="stars missing entirely")
    prompt = build_refine_prompt(("layout", "consistency"), scores, tiny_spec())
    assert "Reviewer comments: stars missing entirely" in prompt


# ---------------------------------------------------------------------------
# Config validation

@pytest.mark.parametrize("theta", [0.5, 1.0, 10.5, -3.0])
def test_config_rejects_bad_theta(theta):
    with pytest.raises(ValueError, match="theta"):
        ReflectionConfig(theta=theta)


def test_config_rejects_negative_budget():
    with pytest.raises(ValueError, match="max_iter"):
        ReflectionConfig(max_iter=-1)


def test_config_boundary_theta_allowed():
    assert ReflectionConfig(theta=10.0).theta == 10.0


# ---------------------------------------------------------------------------
# Non-regression property

@settings(max_examples=60, deadline=None)
@given(
    theta=st.sampled_from([6.0, 7.5, 9.0]),
    budget=st.integers(min_value=0, max_value=3),
    seq=st.lists(st.floats(min_value=1.0, max_value=10.0,
                           allow_nan=False), min_size=4, max_size=4),
)
def test_best_score_never_regresses(theta, budget, seq):
    critic = scripted(*seq)
    config = ReflectionConfig(theta=theta, max_iter=budget)
    best, trace = run_reflection(tiny_spec(), config, critic,
                                 EchoChatClient(), FLAT)
    initial = trace.iterations[0].scores.s_avg
    assert trace.best_score >= initial
    assert trace.critic_calls <= budget + 1
    assert trace.stop_reason in ("converged", "budget_exhausted")
    scored = [it.scores.s_avg for it in trace.iterations if not it.failed]
    assert trace.best_score == max(scored)
