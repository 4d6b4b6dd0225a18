"""Operator CLI.

Credentials and endpoint selection come from the environment:
GAMEUI_BASE_URL, GAMEUI_MODEL, GAMEUI_API_KEY. Without GAMEUI_BASE_URL the
commands that need a model fall back to the offline mock client, so every
subcommand works in a network-less checkout.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .critic import ModelCritic, parse_scores
from .experiments import EXPERIMENTS, run_experiment
from .generator import build_corpus, build_generation_prompt, corpus_as_rows
from .llm import HttpChatClient, MockDesignClient
from .metrics import structural_profile
from .pipeline import PipelineConfig, run_job
from .render import RenderConfig, RenderTier, render
from .service import ServiceConfig, endpoint_from_env, serve as serve_app
from .spec import parse_spec, serialize_spec, validate_spec
from .store import JobStore


def _client(mock: bool):
    endpoint = endpoint_from_env()
    if mock or endpoint is None:
        return MockDesignClient(seed=7)
    return HttpChatClient(endpoint)


def _load_spec(path: str):
    spec = parse_spec(Path(path).read_text())
    return spec


@click.group()
def main():
    """Game-UI design generation pipeline."""


@main.command()
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="write CSV here instead of stdout")
def corpus(seed: int, out: str | None):
    """Emit the 110-case evaluation corpus as CSV."""
    rows = corpus_as_rows(build_corpus(seed))
    target = open(out, "w", newline="") if out else sys.stdout
    writer = csv.DictWriter(target, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if out:
        target.close()
        click.echo(f"wrote {len(rows)} cases to {out}")


@main.command()
@click.option("--case", "case_id", required=True, help="corpus case id, e.g. CC-001")
@click.option("--mock", is_flag=True, help="use the offline mock client")
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--reflect", is_flag=True)
@click.option("--storage", default="./jobstore", show_default=True)
@click.option("--tier", default="gradient", show_default=True,
              type=click.Choice([t.value for t in RenderTier]))
def generate(case_id: str, mock: bool, seed: int, reflect: bool,
             storage: str, tier: str):
    """Run the full pipeline for one corpus case."""
    cases = {c.case_id: c for c in build_corpus(seed)}
    if case_id not in cases:
        raise click.ClickException(f"unknown case id {case_id!r}")
    store = JobStore(storage)
    config = PipelineConfig(tiers=(tier,), reflect=reflect)
    record = run_job(store, cases[case_id], config, _client(mock))
    click.echo(json.dumps(record.to_dict(), indent=2, sort_keys=True))
    if record.status != "done":
        raise SystemExit(1)


@main.command(name="render")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tier", default="gradient", show_default=True,
              type=click.Choice([t.value for t in RenderTier]))
@click.option("--scale", default=1, show_default=True, type=int)
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
def render_cmd(spec_path: str, tier: str, scale: int, out: str):
    """Rasterize a spec file to PNG."""
    spec = _load_spec(spec_path)
    image = render(spec, RenderConfig(tier=RenderTier(tier), scale=scale))
    image.save_png(out)
    click.echo(f"{out}: {image.width}x{image.height}, sha256 {image.pixel_sha256()[:16]}")


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def metrics(spec_path: str):
    """Print the structural profile of a spec file as JSON."""
    spec = _load_spec(spec_path)
    profile = structural_profile(spec)
    violations = validate_spec(spec)
    out = profile.as_row(Path(spec_path).stem)
    out["violations"] = [f"{v.path}: {v.rule}" for v in violations]
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--image", "image_path", type=click.Path(exists=True), default=None,
              help="rendered PNG to send to a live vision endpoint")
@click.option("--reply", "reply_path", type=click.Path(exists=True), default=None,
              help="parse a stored critic reply instead of calling one")
@click.option("--template", default="character_card", show_default=True)
@click.option("--rarity", default="N", show_default=True)
@click.option("--quality", default=6.5, show_default=True, type=float,
              help="latent quality for the offline critic fallback")
def review(image_path: str | None, reply_path: str | None, template: str,
           rarity: str, quality: float):
    """Score a design: stored reply, live vision endpoint, or offline critic."""
    from .critic import VlmCritic
    from .render import RasterImage
    from .spec import RarityTier, TemplateKind

    endpoint = endpoint_from_env()
    if reply_path:
        scores = parse_scores(Path(reply_path).read_text())
    elif image_path and endpoint is not None:
        from PIL import Image

        img = Image.open(image_path).convert("RGBA")
        raster = RasterImage(img.width, img.height, img.tobytes())
        critic = VlmCritic(HttpChatClient(endpoint))
        scores = critic.review(raster, TemplateKind(template),
                               RarityTier(rarity.upper()))
    else:
        scores = ModelCritic(quality, seed=7).current_scores()
    click.echo(json.dumps(scores.as_dict() | {"s_avg": scores.s_avg}, indent=2))


@main.command()
@click.option("--case", "case_id", required=True)
@click.option("--theta", default=7.5, show_default=True, type=float)
@click.option("--max-iter", default=2, show_default=True, type=int)
@click.option("--mock", is_flag=True)
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--storage", default="./jobstore", show_default=True)
def reflect(case_id: str, theta: float, max_iter: int, mock: bool,
            seed: int, storage: str):
    """Generate a case and run the reflection loop on it."""
    cases = {c.case_id: c for c in build_corpus(seed)}
    if case_id not in cases:
        raise click.ClickException(f"unknown case id {case_id!r}")
    store = JobStore(storage)
    config = PipelineConfig(tiers=("flat",), reflect=True, theta=theta,
                            max_iter=max_iter)
    record = run_job(store, cases[case_id], config, _client(mock))
    click.echo(json.dumps(record.to_dict(), indent=2, sort_keys=True))
    if record.status != "done":
        raise SystemExit(1)


@main.command(name="eval")
@click.option("--experiment", required=True, type=click.Choice(EXPERIMENTS))
@click.option("--out", default="./results", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--seed", default=None, type=int)
@click.option("--cases", default=None, type=int,
              help="number of corpus cases (default per experiment)")
@click.option("--mock/--live", default=True,
              help="offline fixture/mock generation vs the configured "
                   "endpoint; live runs record outputs without asserting")
def eval_cmd(experiment: str, out: str, seed: int | None,
             cases: int | None, mock: bool):
    """Run a named experiment; writes table.csv, stats.json, figures/."""
    client = None
    if not mock:
        endpoint = endpoint_from_env()
        if endpoint is None:
            raise click.ClickException(
                "--live requires GAMEUI_BASE_URL (and optionally "
                "GAMEUI_MODEL, GAMEUI_API_KEY)")
        client = HttpChatClient(endpoint)
    root = run_experiment(experiment, out, seed=seed, n_cases=cases,
                          client=client)
    click.echo(f"experiment artifacts in {root}")
    for path in sorted(root.rglob("*")):
        if path.is_file():
            click.echo(f"  {path.relative_to(root)}")


@main.command(name="stats")
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
def stats_cmd(input_dir: str):
    """Print the stats.json of a finished experiment run."""
    path = Path(input_dir) / "stats.json"
    if not path.exists():
        raise click.ClickException(f"no stats.json under {input_dir}")
    click.echo(path.read_text().rstrip())


@main.command()
@click.option("--port", default=8750, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--storage", default="./jobstore", show_default=True)
@click.option("--mock/--live", default=True,
              help="offline mock client vs the configured endpoint")
@click.option("--workers", default=4, show_default=True, type=int)
def serve(port: int, host: str, storage: str, mock: bool, workers: int):
    """Start the HTTP service."""
    config = ServiceConfig(storage_dir=storage, workers=workers, mock=mock,
                           endpoint=endpoint_from_env())
    serve_app(config, host=host, port=port)


if __name__ == "__main__":
    main()
