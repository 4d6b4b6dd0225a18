"""Experiment harnesses: ablation, renderer tiers, reflection, ceiling.

Each runner executes a deterministic desk-scale experiment end to end and
writes a uniform artifact set under ``<out_dir>/<experiment>/``:

    table.csv     aggregate table (one row per arm / tier / condition / case)
    stats.json    test statistics and headline numbers
    cases.jsonl   per-case records
    figures/*.png rendered charts

Everything is seeded; rerunning with the same seed reproduces every byte of
table.csv and stats.json.
"""

from __future__ import annotations

import csv
import json
import random
import time
from dataclasses import dataclass
from pathlib import Path

from .critic import ModelCritic
from .generator import build_corpus, build_generation_prompt
from .llm import EchoChatClient, MockDesignClient
from .metrics import structural_profile
from .postprocess import (
    ExtractError,
    enhance_rarity,
    extract_json_block,
    inject_stat_bars,
    repair_spec,
)
from .reflector import ReflectionConfig, run_reflection
from .render import RenderConfig, RenderTier, overlapping_sibling_pairs, render
from .spec import (
    DesignSpec,
    Paint,
    ParseError,
    SpecNode,
    TemplateKind,
    parse_spec,
    serialize_spec,
)
from .stats import (
    DegenerateInput,
    PearsonResult,
    cohen_d_paired,
    mann_whitney_u,
    pearson_r,
    wilcoxon_signed_rank,
)

EXPERIMENTS = ("ablation", "renderer", "reflection", "ceiling")


@dataclass(frozen=True)
class Condition:
    label: str
    cases: tuple[str, ...]
    init_scores: tuple[float, ...]
    final_scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.init_scores) != len(self.final_scores):
            raise ValueError("init/final score lists must pair up")

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(f - i for i, f in zip(self.init_scores, self.final_scores))


# ---------------------------------------------------------------------------
# Artifact writing

def _prepare(out_dir: str | Path, name: str) -> Path:
    root = Path(out_dir) / name
    (root / "figures").mkdir(parents=True, exist_ok=True)
    return root


def _write_table(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _bar_figure(path: Path, labels: list[str], series: dict[str, list[float]],
                title: str, ylabel: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(1, len(series))
    for i, (name, values) in enumerate(series.items()):
        xs = [j + i * width for j in range(len(labels))]
        ax.bar(xs, values, width=width, label=name)
    ax.set_xticks([j + width * (len(series) - 1) / 2 for j in range(len(labels))])
    ax.set_xticklabels(labels, rotation=15, ha="right")
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _scatter_figure(path: Path, x: list[float], y: list[float],
                    title: str, xlabel: str, ylabel: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(x, y, alpha=0.75)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Shared pipeline step: mock generation -> postprocessed spec

def _generate_case_spec(case, client, ablation=frozenset()):
    """Returns (spec or None, failure stage or None)."""
    bundle = build_generation_prompt(case, ablation)
    raw, _, _ = client.complete(bundle.messages(), max_tokens=bundle.max_tokens,
                                temperature=bundle.temperature)
    try:
        block = extract_json_block(raw)
    except ExtractError:
        return None, "extract"
    try:
        spec = parse_spec(block)
    except ParseError:
        return None, "parse"
    spec = repair_spec(spec)
    if case.stats:
        spec = inject_stat_bars(spec, list(case.stats))
    spec = enhance_rarity(spec, case.rarity, case.element)
    return spec, None


# ---------------------------------------------------------------------------
# Ablation: prompt sections on/off

ABLATION_ARMS = {
    "full": frozenset(),
    "no_few_shot": frozenset({"few_shot"}),
    "no_rules": frozenset({"rules"}),
    "no_schema": frozenset({"schema"}),
}


def run_ablation(out_dir: str | Path, *, seed: int = 7, n_cases: int = 12,
                 client=None) -> Path:
    root = _prepare(out_dir, "ablation")
    cases = [c for c in build_corpus(seed) if c.case_id.startswith("CC")][:n_cases]
    client = client if client is not None else MockDesignClient(seed=seed)

    per_case: list[dict] = []
    arm_profiles: dict[str, list] = {arm: [] for arm in ABLATION_ARMS}
    for arm, flags in ABLATION_ARMS.items():
        for case in cases:
            spec, failed_at = _generate_case_spec(case, client, flags)
            record = {"arm": arm, "case_id": case.case_id,
                      "parsed": spec is not None, "failed_at": failed_at}
            if spec is not None:
                profile = structural_profile(spec)
                record.update(profile.as_row(case.case_id))
                arm_profiles[arm].append(profile)
            per_case.append(record)

    table = []
    for arm in ABLATION_ARMS:
        profiles = arm_profiles[arm]
        n_ok = len(profiles)
        row = {"arm": arm, "n_cases": len(cases), "parsed": n_ok,
               "parse_rate": round(n_ok / len(cases), 4)}
        for key, attr in (("nc", "node_count"), ("cov", "canvas_coverage"),
                          ("cd", "color_diversity"), ("cr", "text_contrast"),
                          ("ec", "element_completeness")):
            vals = [getattr(p, attr) for p in profiles]
            row[f"mean_{key}"] = round(sum(vals) / len(vals), 4) if vals else ""
        table.append(row)

    stats: dict = {"arms": {row["arm"]: row for row in table}}
    full_ec = [p.element_completeness for p in arm_profiles["full"]]
    for arm in ABLATION_ARMS:
        if arm == "full":
            continue
        arm_ec = [p.element_completeness for p in arm_profiles[arm]]
        if full_ec and arm_ec:
            u, p = mann_whitney_u(full_ec, arm_ec)
            stats[f"u_full_vs_{arm}_ec"] = {"U": u, "p_two_sided": p}

    _write_table(root / "table.csv", table)
    _write_json(root / "stats.json", stats)
    _write_jsonl(root / "cases.jsonl", per_case)
    _bar_figure(
        root / "figures" / "ablation_completeness.png",
        list(ABLATION_ARMS),
        {"parse rate": [row["parse_rate"] for row in table],
         "mean EC": [row["mean_ec"] if row["mean_ec"] != "" else 0.0
                     for row in table]},
        "Prompt ablation: parse rate and element completeness", "value",
    )
    return root


# ---------------------------------------------------------------------------
# Renderer: tier comparison

def run_renderer(out_dir: str | Path, *, seed: int = 7, n_cases: int = 9) -> Path:
    root = _prepare(out_dir, "renderer")
    corpus = build_corpus(seed)
    cards = [c for c in corpus if c.case_id.startswith("CC")][: n_cases // 3]
    items = [c for c in corpus if c.case_id.startswith("IT")][: n_cases // 3]
    panels = [c for c in corpus if c.case_id.startswith("SP")][: n_cases // 3]
    cases = cards + items + panels
    client = MockDesignClient(seed=seed)

    per_case: list[dict] = []
    tier_rows: dict[RenderTier, list[dict]] = {t: [] for t in RenderTier}
    for case in cases:
        spec, failed_at = _generate_case_spec(case, client)
        if spec is None:
            continue
        source_overlaps = overlapping_sibling_pairs(spec)
        for tier in RenderTier:
            config = RenderConfig(tier=tier)
            t0 = time.perf_counter()
            image = render(spec, config)
            ms = (time.perf_counter() - t0) * 1000.0
            again = render(spec, config)
            distinct = len(set(
                image.pixels[i : i + 4] for i in range(0, len(image.pixels), 4)
            ))
            record = {
                "case_id": case.case_id, "tier": tier.value,
                "ms": round(ms, 3), "sha256": image.pixel_sha256(),
                "deterministic": image.pixel_sha256() == again.pixel_sha256(),
                "distinct_colors": distinct,
                "source_overlapping_pairs": source_overlaps,
            }
            per_case.append(record)
            tier_rows[tier].append(record)

    table = []
    for tier in RenderTier:
        rows = tier_rows[tier]
        table.append({
            "tier": tier.value,
            "n": len(rows),
            "mean_ms": round(sum(r["ms"] for r in rows) / len(rows), 3) if rows else "",
            "mean_distinct_colors": round(
                sum(r["distinct_colors"] for r in rows) / len(rows), 1) if rows else "",
            "all_deterministic": all(r["deterministic"] for r in rows),
        })

    _write_table(root / "table.csv", table)
    _write_json(root / "stats.json", {
        "tiers": {row["tier"]: row for row in table},
        "total_renders": len(per_case),
    })
    _write_jsonl(root / "cases.jsonl", per_case)
    _bar_figure(
        root / "figures" / "renderer_cost.png",
        [t.value for t in RenderTier],
        {"mean ms": [row["mean_ms"] if row["mean_ms"] != "" else 0.0
                     for row in table]},
        "Render cost by tier", "milliseconds",
    )
    return root


# ---------------------------------------------------------------------------
# Reflection: before/after over a mock corpus

def run_reflection_experiment(out_dir: str | Path, *, seed: int = 7,
                              n_cases: int = 28, theta: float = 7.5,
                              max_iter: int = 2, client=None) -> Path:
    root = _prepare(out_dir, "reflection")
    artifacts = root / "artifacts"
    artifacts.mkdir(exist_ok=True)
    cases = [c for c in build_corpus(seed) if c.case_id.startswith("CC")][:n_cases]
    gen_client = client if client is not None else MockDesignClient(seed=seed)
    rng = random.Random(seed)
    config = ReflectionConfig(theta=theta, max_iter=max_iter)
    render_config = RenderConfig(tier=RenderTier.FLAT)

    per_case: list[dict] = []
    inits: list[float] = []
    bests: list[float] = []
    for i, case in enumerate(cases):
        spec, failed_at = _generate_case_spec(case, gen_client)
        if spec is None:
            continue
        q0 = min(8.6, max(4.2, rng.gauss(6.4, 0.85)))
        critic = ModelCritic(q0, target=theta, seed=seed * 1000 + i)
        best, trace = run_reflection(spec, config, critic, EchoChatClient(),
                                     render_config, attrs=case.stats)
        (artifacts / f"{case.case_id}.spec.json").write_text(
            serialize_spec(best) + "\n", encoding="utf-8")
        (artifacts / f"{case.case_id}.trace.json").write_text(
            json.dumps(trace.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        render(best, render_config).save_png(artifacts / f"{case.case_id}.png")
        init = trace.iterations[0].scores.s_avg
        inits.append(init)
        bests.append(trace.best_score)
        per_case.append({
            "case_id": case.case_id,
            "rarity": case.rarity.value,
            "init_s_avg": round(init, 4),
            "best_s_avg": round(trace.best_score, 4),
            "delta": round(trace.best_score - init, 4),
            "best_k": trace.best_k,
            "critic_calls": trace.critic_calls,
            "refine_calls": trace.refine_calls,
            "stop_reason": trace.stop_reason,
            "regression_free": trace.best_score >= init,
        })

    stats: dict = {
        "n": len(per_case),
        "regression_free": sum(1 for r in per_case if r["regression_free"]),
        "mean_init": round(sum(inits) / len(inits), 4) if inits else None,
        "mean_delta": round(sum(b - i for i, b in zip(inits, bests))
                            / len(inits), 4) if inits else None,
        "skipped_at_k0": sum(1 for r in per_case if r["refine_calls"] == 0),
    }
    improved = [(i, b) for i, b in zip(inits, bests) if b != i]
    if len(improved) >= 5:
        w, p = wilcoxon_signed_rank(inits, bests)
        stats["wilcoxon"] = {"W": w, "p_two_sided": p}
    try:
        stats["cohen_d_paired"] = cohen_d_paired(inits, bests)
    except DegenerateInput:
        stats["cohen_d_paired"] = None

    _write_table(root / "table.csv", per_case)
    _write_json(root / "stats.json", stats)
    _write_jsonl(root / "cases.jsonl", per_case)
    _scatter_figure(
        root / "figures" / "reflection_delta.png",
        inits, [b - i for i, b in zip(inits, bests)],
        "Improvement vs initial quality", "initial s_avg", "delta (best - init)",
    )
    return root


# ---------------------------------------------------------------------------
# Ceiling: synthetic saturating critic across initial-quality conditions

@dataclass(frozen=True)
class CeilingCondition:
    label: str
    init_mean: float
    n: int = 8
    init_sigma: float = 0.3


DEFAULT_CEILING_CONDITIONS = (
    CeilingCondition("c1", 5.90),
    CeilingCondition("c2", 6.35),
    CeilingCondition("c3", 6.80),
    CeilingCondition("c4", 7.25),
    CeilingCondition("c5", 7.70),
)


def _tiny_spec(case_id: str) -> DesignSpec:
    root = SpecNode(
        node_type="FRAME", name=f"thumb_{case_id}", x=0.0, y=0.0,
        width=96.0, height=96.0,
        fills=(Paint.solid(0.12, 0.12, 0.16),),
        children=(
            SpecNode(node_type="RECTANGLE", name="icon_base", x=16.0, y=16.0,
                     width=64.0, height=64.0,
                     fills=(Paint.solid(0.35, 0.3, 0.5),)),
        ),
    )
    return DesignSpec(root=root, template=TemplateKind.ITEM_THUMBNAIL)


def ceiling_experiment(
    conditions: tuple[CeilingCondition, ...] = DEFAULT_CEILING_CONDITIONS,
    seed: int = 0,
    *,
    theta: float = 7.5,
    max_iter: int = 2,
    gain_rate: float = 0.35,
    noise_sigma: float = 0.05,
) -> tuple[list[dict], PearsonResult, list[dict]]:
    """Reflection under a saturating critic, across initial-quality bands.

    Returns (condition table, Pearson over condition means, per-case rows).
    Raises DegenerateInput when every condition converges immediately
    (all deltas zero — the correlation is undefined).
    """
    if len(conditions) < 4:
        raise ValueError("need >= 4 conditions to correlate")
    rng = random.Random(seed)
    config = ReflectionConfig(theta=theta, max_iter=max_iter)
    render_config = RenderConfig(tier=RenderTier.FLAT)

    rows: list[dict] = []
    per_case: list[dict] = []
    mean_inits: list[float] = []
    mean_deltas: list[float] = []
    for cond in conditions:
        inits: list[float] = []
        deltas: list[float] = []
        for i in range(cond.n):
            case_id = f"{cond.label}-{i + 1:02d}"
            q0 = min(9.9, max(1.0, rng.gauss(cond.init_mean, cond.init_sigma)))
            critic = ModelCritic(q0, target=theta, gain_rate=gain_rate,
                                 noise_sigma=noise_sigma,
                                 seed=rng.randrange(2 ** 31))
            _, trace = run_reflection(_tiny_spec(case_id), config, critic,
                                      EchoChatClient(), render_config)
            init = trace.iterations[0].scores.s_avg
            delta = trace.best_score - init
            inits.append(init)
            deltas.append(delta)
            per_case.append({
                "condition": cond.label, "case_id": case_id,
                "latent_q0": round(q0, 4), "init_s_avg": round(init, 4),
                "delta": round(delta, 4), "stop_reason": trace.stop_reason,
                "critic_calls": trace.critic_calls,
            })
        mean_init = sum(inits) / len(inits)
        mean_delta = sum(deltas) / len(deltas)
        mean_inits.append(mean_init)
        mean_deltas.append(mean_delta)
        rows.append({
            "condition": cond.label, "n": cond.n,
            "mean_init": round(mean_init, 4),
            "mean_delta": round(mean_delta, 4),
            "mean_final": round(mean_init + mean_delta, 4),
        })

    correlation = pearson_r(mean_inits, mean_deltas)  # DegenerateInput if flat
    return rows, correlation, per_case


def run_ceiling(out_dir: str | Path, *, seed: int = 0) -> Path:
    root = _prepare(out_dir, "ceiling")
    rows, correlation, per_case = ceiling_experiment(seed=seed)
    _write_table(root / "table.csv", rows)
    _write_json(root / "stats.json", {
        "pearson": {"r": correlation.r, "t": correlation.t,
                    "df": correlation.df, "p_two_sided": correlation.p_two_sided},
        "conditions": rows,
    })
    _write_jsonl(root / "cases.jsonl", per_case)
    _scatter_figure(
        root / "figures" / "ceiling_correlation.png",
        [row["mean_init"] for row in rows],
        [row["mean_delta"] for row in rows],
        f"Improvement ceiling (r = {correlation.r:.3f})",
        "condition mean initial s_avg", "condition mean delta",
    )
    return root


def run_experiment(name: str, out_dir: str | Path, *, seed: int | None = None,
                   n_cases: int | None = None, client=None) -> Path:
    """Dispatch one named experiment.

    ``client`` overrides the spec-generation chat client (a live HTTP client
    when results should be recorded against a real endpoint; experiments
    never assert on live outputs). The ceiling experiment is fully synthetic
    and ignores both ``client`` and ``n_cases``.
    """
    s = seed
    runners = {
        "ablation": lambda: run_ablation(
            out_dir, seed=7 if s is None else s,
            **({"n_cases": n_cases} if n_cases else {}),
            client=client),
        "renderer": lambda: run_renderer(
            out_dir, seed=7 if s is None else s,
            **({"n_cases": n_cases} if n_cases else {})),
        "reflection": lambda: run_reflection_experiment(
            out_dir, seed=7 if s is None else s,
            **({"n_cases": n_cases} if n_cases else {}),
            client=client),
        "ceiling": lambda: run_ceiling(out_dir, seed=0 if s is None else s),
    }
    if name not in runners:
        raise ValueError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    return runners[name]()
