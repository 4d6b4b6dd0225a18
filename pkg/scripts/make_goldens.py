#!/usr/bin/env python3
"""Regenerate tests/goldens.json: frozen pixel hashes for the fixture specs.

Run from the repo root after any intentional renderer change:

    python3 scripts/make_goldens.py

Review the diff before committing — every hash change must be explainable.
"""

from __future__ import annotations

import json
from pathlib import Path

from gameui.generator import load_exemplar
from gameui.llm import FixtureChatClient
from gameui.postprocess import extract_json_block, repair_spec
from gameui.render import RenderConfig, RenderTier, render
from gameui.spec import parse_spec

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "goldens.json"


def fixture_specs():
    yield "exemplar_card", load_exemplar()
    yield "skill_panel", parse_spec(
        (ROOT / "tests" / "fixtures" / "skill_panel.json").read_text())
    raw = (FixtureChatClient.bundled().fixture_dir / "default.txt").read_text()
    yield "item_default", repair_spec(parse_spec(extract_json_block(raw)))


def main() -> None:
    goldens: dict[str, dict[str, str]] = {}
    for label, spec in fixture_specs():
        per_tier = {}
        for tier in RenderTier:
            image = render(spec, RenderConfig(tier=tier))
            per_tier[tier.value] = image.pixel_sha256()
        goldens[label] = per_tier
    OUT.write_text(json.dumps(goldens, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")
    for label, per_tier in goldens.items():
        for tier, digest in per_tier.items():
            print(f"  {label:14s} {tier:9s} {digest[:16]}")


if __name__ == "__main__":
    main()
