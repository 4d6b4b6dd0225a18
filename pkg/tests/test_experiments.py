"""Experiment harnesses: artifacts on disk, seeded reproducibility."""

import csv
import json

import pytest

from gameui.experiments import (
    ABLATION_ARMS,
    CeilingCondition,
    ceiling_experiment,
    run_ablation,
    run_ceiling,
    run_experiment,
    run_reflection_experiment,
    run_renderer,
)
from gameui.spec import parse_spec
from gameui.stats import DegenerateInput


def read_table(root):
    with open(root / "table.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def read_stats(root):
    return json.loads((root / "stats.json").read_text())


def read_cases(root):
    lines = (root / "cases.jsonl").read_text().splitlines()
    return [json.loads(line) for line in lines]


# ---------------------------------------------------------------------------
# Ablation

@pytest.fixture(scope="module")
def ablation_root(tmp_path_factory):
    return run_ablation(tmp_path_factory.mktemp("exp"), seed=7, n_cases=8)


def test_ablation_artifact_set(ablation_root):
    for name in ("table.csv", "stats.json", "cases.jsonl",
                 "figures/ablation_completeness.png"):
        assert (ablation_root / name).exists(), name


def test_ablation_table_covers_all_arms(ablation_root):
    rows = read_table(ablation_root)
    assert [r["arm"] for r in rows] == list(ABLATION_ARMS)
    full = rows[0]
    assert full["parse_rate"] == "1.0"


def test_ablation_full_arm_dominates_schemaless(ablation_root):
    rows = {r["arm"]: r for r in read_table(ablation_root)}
    # free-text arm: much of the output is not even a node tree
    assert float(rows["no_schema"]["parse_rate"]) < 1.0
    assert float(rows["full"]["mean_ec"]) > float(rows["no_rules"]["mean_ec"])


def test_ablation_case_records_tag_failures(ablation_root):
    records = read_cases(ablation_root)
    assert len(records) == 4 * 8
    failed = [r for r in records if not r["parsed"]]
    assert failed, "expected some schemaless parses to fail"
    assert all(r["arm"] == "no_schema" for r in failed)
    assert all(r["failed_at"] in ("extract", "parse") for r in failed)


# ---------------------------------------------------------------------------
# Renderer

@pytest.fixture(scope="module")
def renderer_root(tmp_path_factory):
    # 9 cases = 3 per template, reaching SR tier whose fills are gradients
    return run_renderer(tmp_path_factory.mktemp("exp"), seed=7, n_cases=9)


def test_renderer_artifact_set(renderer_root):
    for name in ("table.csv", "stats.json", "cases.jsonl",
                 "figures/renderer_cost.png"):
        assert (renderer_root / name).exists(), name


def test_renderer_covers_three_tiers_deterministically(renderer_root):
    rows = read_table(renderer_root)
    assert [r["tier"] for r in rows] == ["flat", "gradient", "layout"]
    assert all(r["all_deterministic"] == "True" for r in rows)
    records = read_cases(renderer_root)
    assert all(len(r["sha256"]) == 64 for r in records)
    assert all(r["deterministic"] for r in records)


def test_renderer_gradient_tier_uses_more_colors(renderer_root):
    stats = read_stats(renderer_root)["tiers"]
    assert stats["gradient"]["mean_distinct_colors"] \
        > stats["flat"]["mean_distinct_colors"]


# ---------------------------------------------------------------------------
# Reflection

@pytest.fixture(scope="module")
def reflection_root(tmp_path_factory):
    return run_reflection_experiment(tmp_path_factory.mktemp("exp"),
                                     seed=7, n_cases=8)


def test_reflection_artifact_set(reflection_root):
    for name in ("table.csv", "stats.json", "cases.jsonl",
                 "figures/reflection_delta.png"):
        assert (reflection_root / name).exists(), name


def test_reflection_persists_per_case_artifacts(reflection_root):
    rows = read_table(reflection_root)
    assert rows
    for row in rows:
        case = row["case_id"]
        spec_path = reflection_root / "artifacts" / f"{case}.spec.json"
        trace_path = reflection_root / "artifacts" / f"{case}.trace.json"
        png_path = reflection_root / "artifacts" / f"{case}.png"
        assert spec_path.exists() and trace_path.exists() and png_path.exists()
        spec = parse_spec(spec_path.read_text())
        assert (spec.root.width, spec.root.height) == (320.0, 450.0)
        trace = json.loads(trace_path.read_text())
        assert trace["critic_calls"] == int(row["critic_calls"])
        assert png_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_reflection_never_regresses(reflection_root):
    rows = read_table(reflection_root)
    assert all(r["regression_free"] == "True" for r in rows)
    stats = read_stats(reflection_root)
    assert stats["regression_free"] == stats["n"] == len(rows)
    assert stats["mean_delta"] >= 0.0


def test_reflection_reproducible_per_seed(reflection_root, tmp_path):
    again = run_reflection_experiment(tmp_path, seed=7, n_cases=8)
    assert (again / "table.csv").read_bytes() \
        == (reflection_root / "table.csv").read_bytes()
    assert (again / "stats.json").read_bytes() \
        == (reflection_root / "stats.json").read_bytes()


# ---------------------------------------------------------------------------
# Ceiling

def test_ceiling_is_strongly_anticorrelated():
    rows, correlation, per_case = ceiling_experiment(seed=0)
    assert len(rows) == 5
    assert len(per_case) == sum(r["n"] for r in rows)
    assert correlation.r <= -0.8
    assert rows[0]["mean_delta"] > rows[-1]["mean_delta"]


def test_ceiling_bit_reproducible():
    first = ceiling_experiment(seed=0)
    second = ceiling_experiment(seed=0)
    assert first == second
    assert first[1].r == pytest.approx(-0.9968714504895875, abs=1e-12)


def test_ceiling_needs_four_conditions():
    with pytest.raises(ValueError, match="conditions"):
        ceiling_experiment(conditions=(CeilingCondition("a", 5.0),
                                       CeilingCondition("b", 6.0),
                                       CeilingCondition("c", 7.0)))


def test_ceiling_all_converged_is_degenerate():
    high = tuple(CeilingCondition(f"c{i}", 8.5 + 0.3 * i, n=3, init_sigma=0.0)
                 for i in range(4))
    with pytest.raises(DegenerateInput) as exc:
        ceiling_experiment(conditions=high, noise_sigma=0.0)
    assert exc.value.kind == "zero_variance"


def test_run_ceiling_artifacts(tmp_path):
    root = run_ceiling(tmp_path, seed=0)
    for name in ("table.csv", "stats.json", "cases.jsonl",
                 "figures/ceiling_correlation.png"):
        assert (root / name).exists(), name
    stats = read_stats(root)
    assert stats["pearson"]["r"] == pytest.approx(-0.9968714504895875)
    assert len(read_table(root)) == 5


# ---------------------------------------------------------------------------
# Dispatch

def test_run_experiment_rejects_unknown_name(tmp_path):
    with pytest.raises(ValueError, match="unknown experiment"):
        run_experiment("warp", tmp_path)


def test_run_experiment_dispatches(tmp_path):
    root = run_experiment("ceiling", tmp_path)
    assert root == tmp_path / "ceiling"
    assert (root / "table.csv").exists()
