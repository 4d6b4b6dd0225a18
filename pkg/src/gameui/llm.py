"""Chat-completion clients: one real HTTP client, several offline stand-ins.

Every client implements ``complete(messages, *, max_tokens, temperature)``
and returns ``(text, latency_seconds, token_count)``. The offline clients
exist so the whole pipeline — corpus generation, reflection, experiments —
runs without network access or credentials.
"""

from __future__ import annotations

import importlib.resources
import json
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

Message = dict[str, object]  # {"role": ..., "content": str | list[part]}


class LlmError(Exception):
    def __init__(self, kind: str, message: str = "", status_code: int | None = None):
        self.kind = kind
        self.status_code = status_code
        super().__init__(f"{kind}: {message}" if message else kind)


@dataclass(frozen=True)
class LlmEndpoint:
    """Connection details for an OpenAI-compatible chat API.

    The key is deliberately excluded from ``repr`` and never serialized;
    it must not leak into logs, traces, or stored job payloads.
    """

    base_url: str
    model: str
    api_key: str = field(repr=False, default="")
    timeout_seconds: float = 60.0

    def masked(self) -> dict[str, object]:
        return {"base_url": self.base_url, "model": self.model, "api_key": "***"}


class HttpChatClient:
    """Minimal OpenAI-compatible /chat/completions client.

    Retries exactly once on transport errors and non-2xx responses, then
    raises. An empty or whitespace-only completion is an error too: the
    pipeline has nothing to parse and should say so rather than produce a
    blank spec downstream.
    """

    def __init__(self, endpoint: LlmEndpoint):
        self.endpoint = endpoint

    def complete(self, messages: list[Message], *, max_tokens: int,
                 temperature: float) -> tuple[str, float, int]:
        url = self.endpoint.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.endpoint.model,
            "messages": messages,
            "max_tokens": max_tokens,
            "temperature": temperature,
        }
        headers = {"Authorization": f"Bearer {self.endpoint.api_key}"}
        started = time.monotonic()
        last_err: LlmError | None = None
        for _ in range(2):
            try:
                resp = httpx.post(url, json=payload, headers=headers,
                                  timeout=self.endpoint.timeout_seconds)
            except httpx.HTTPError as exc:
                last_err = LlmError("transport", str(exc))
                continue
            if resp.status_code // 100 != 2:
                last_err = LlmError("http_status", resp.text[:200],
                                    status_code=resp.status_code)
                continue
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
            usage = data.get("usage", {})
            tokens = int(usage.get("completion_tokens", _estimate_tokens(text)))
            if not text.strip():
                raise LlmError("empty_completion", "model returned no content")
            return text, time.monotonic() - started, tokens
        assert last_err is not None
        raise last_err


def _estimate_tokens(text: str) -> int:
    # crude but stable: whitespace tokens plus punctuation-ish overhead
    return max(1, len(text) // 4)


class FixtureChatClient:
    """Replays stored completions from a directory, keyed by case id.

    Looks for ``<case_id>.txt``; falls back to ``default.txt``. Raises if
    neither exists so a missing fixture fails loudly.
    """

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)
        self.calls = 0

    @classmethod
    def bundled(cls) -> "FixtureChatClient":
        """Client over the completions shipped inside the package."""
        root = importlib.resources.files("gameui").joinpath("data", "completions")
        return cls(Path(str(root)))

    def complete(self, messages: list[Message], *, max_tokens: int,
                 temperature: float) -> tuple[str, float, int]:
        self.calls += 1
        case_id = _case_id_from_messages(messages) or "default"
        for name in (f"{case_id}.txt", "default.txt"):
            path = self.fixture_dir / name
            if path.exists():
                text = path.read_text()
                return text, 0.0, _estimate_tokens(text)
        raise LlmError("transport", f"no fixture for {case_id}")


def _case_id_from_messages(messages: list[Message]) -> str | None:
    for msg in messages:
        content = msg.get("content")
        if isinstance(content, str):
            m = re.search(r"\b(CC|IT|SP)-\d{3}\b", content)
            if m:
                return m.group(0)
    return None


class ScriptedChatClient:
    """Returns queued responses in order; raises when exhausted."""

    def __init__(self, responses: list[str]):
        self.responses = list(responses)
        self.calls: list[list[Message]] = []

    def complete(self, messages: list[Message], *, max_tokens: int,
                 temperature: float) -> tuple[str, float, int]:
        self.calls.append(messages)
        if not self.responses:
            raise LlmError("transport", "script exhausted")
        text = self.responses.pop(0)
        if not text.strip():
            raise LlmError("empty_completion", "scripted empty response")
        return text, 0.0, _estimate_tokens(text)


class EchoChatClient:
    """Extracts the last JSON object embedded in the prompt and returns it.

    Refinement prompts carry the current spec verbatim; echoing it back
    simulates a model that applies no edits, which is the worst-case
    baseline for reflection-loop tests (scores must still never regress).
    """

    def __init__(self):
        self.calls = 0

    def complete(self, messages: list[Message], *, max_tokens: int,
                 temperature: float) -> tuple[str, float, int]:
        from .postprocess import extract_json_block

        self.calls += 1
        for msg in reversed(messages):
            content = msg.get("content")
            if isinstance(content, str) and "{" in content:
                try:
                    block = extract_json_block(content)
                except Exception:
                    continue
                text = "Here is the updated design:\n```json\n" + block + "\n```"
                return text, 0.0, _estimate_tokens(text)
        raise LlmError("empty_completion", "no JSON found in prompt to echo")


class MockDesignClient:
    """Procedurally fabricates a plausible completion for any test case.

    Output mimics a real chat model: a sentence of preamble, a fenced JSON
    block, a closing remark. The JSON itself is a coherent draft for the
    requested template — deliberately imperfect (0-255 colors, off-grid
    geometry with a seeded wobble) so the repair stage has real work to do.
    """

    def __init__(self, seed: int = 0, latency: float = 0.0):
        self.seed = seed
        self.latency = latency
        self.calls = 0

    def complete(self, messages: list[Message], *, max_tokens: int,
                 temperature: float) -> tuple[str, float, int]:
        self.calls += 1
        case_id = _case_id_from_messages(messages) or f"GEN-{self.calls:03d}"
        prompt_text = "\n".join(
            str(m.get("content")) for m in messages if isinstance(m.get("content"), str)
        )
        rng = random.Random(f"{self.seed}:{case_id}")
        body = _fabricate_spec_json(case_id, prompt_text, rng)
        text = (
            f"Sure — here is a draft layout for {case_id}.\n\n"
            "```json\n" + body + "\n```\n\n"
            "Let me know if you want the palette adjusted."
        )
        return text, self.latency, _estimate_tokens(text)


def _fabricate_spec_json(case_id: str, prompt: str, rng: random.Random) -> str:
    def wob(v: float) -> float:
        return v + rng.choice([0.0, 0.0, 0.3, -0.4, 0.7])

    name_m = re.search(r'"([^"]+)", (?:Fire|Water|Wind|Light|Dark) element', prompt)
    title = name_m.group(1) if name_m else case_id

    # the fabricated output quality tracks which prompt sections are present,
    # so ablation arms produce measurably different structures
    if "## Design Spec JSON schema" not in prompt:
        return _fabricate_schemaless(title, rng)
    # route on the requested template; the case-id prefix covers callers
    # that hand-roll messages without the standard brief
    if "Template: item_thumbnail" in prompt or case_id.startswith("IT"):
        return _fabricate_item(title, rng, wob)
    if "Template: skill_panel" in prompt or case_id.startswith("SP"):
        return _fabricate_skill(title, rng, wob)
    has_rules = "## Domain rules" in prompt
    has_example = "## Example" in prompt
    return _fabricate_card(title, prompt, rng, wob, has_rules, has_example)


def _fabricate_schemaless(title: str, rng: random.Random) -> str:
    # free-text arm: the model invents its own shape, usually unusable
    if rng.random() < 0.4:
        return json.dumps({"card": {"title": title, "style": "dark fantasy",
                                    "sections": ["header", "art", "stats"]}},
                          indent=2)
    return json.dumps({
        "type": "FRAME", "name": "design", "x": 0, "y": 0,
        "width": rng.choice([300, 320, 400]), "height": rng.choice([400, 450, 500]),
        "fills": _solid(_rgb(rng)), "strokes": [], "effects": [],
        "children": [
            _text("title", title, 10, 10, 200, 30, 18.0),
            _rect("art", 10, 50, 280, 200, _rgb(rng)),
        ],
    }, indent=2)


def _rgb(rng: random.Random) -> dict:
    return {"r": rng.randint(0, 255), "g": rng.randint(0, 255),
            "b": rng.randint(0, 255), "a": 1.0}


def _solid(color: dict) -> list:
    return [{"kind": "solid", "color": color}]


def _text(name: str, chars: str, x: float, y: float, w: float, h: float,
          size: float = 12.0, color: dict | None = None) -> dict:
    return {
        "type": "TEXT", "name": name, "x": x, "y": y, "width": w, "height": h,
        "fills": _solid(color or {"r": 245, "g": 245, "b": 245, "a": 1.0}),
        "strokes": [], "effects": [], "characters": chars, "font_size": size,
    }


def _rect(name: str, x: float, y: float, w: float, h: float, fill: dict) -> dict:
    return {"type": "RECTANGLE", "name": name, "x": x, "y": y, "width": w,
            "height": h, "fills": _solid(fill), "strokes": [], "effects": []}


def _bar(name: str, y: float, value: int, rng: random.Random) -> list:
    track = {
        "type": "FRAME", "name": f"{name}_bar_track", "x": 70, "y": y,
        "width": 180, "height": 12,
        "fills": _solid({"r": 40, "g": 40, "b": 48, "a": 1.0}),
        "strokes": [], "effects": [],
        "children": [
            _rect(f"{name}_bar_fill", 0, 0, rng.randint(40, 180), 12,
                  {"r": 90, "g": 200, "b": 120, "a": 1.0}),
        ],
    }
    label = _text(f"{name}_label", name.upper(), 16, y - 1, 48, 14, 10.0)
    return [label, track]


def _fabricate_card(title: str, prompt: str, rng: random.Random, wob,
                    has_rules: bool = True, has_example: bool = True) -> str:
    hp = rng.randint(300, 9800)
    children = [
        _rect("bg_rect", 0, 0, 320, 450, {"r": 28, "g": 30, "b": 40, "a": 1.0}),
        _text("name_text", title, 20, 12, 200, 24, 16.0),
        _text("level_text", f"Lv.{rng.randint(1, 99)}", 240, 12, 60, 24, 12.0),
    ]
    if has_example:
        # richer composition mirrors the few-shot exemplar's structure
        children.append({
            "type": "FRAME", "name": "portrait_frame", "x": wob(20), "y": wob(48),
            "width": 280, "height": 200,
            "fills": _solid(_rgb(rng)), "strokes": [], "effects": [],
            "children": [
                {"type": "ELLIPSE", "name": "portrait_placeholder", "x": 90,
                 "y": 50, "width": 100, "height": 100,
                 "fills": _solid(_rgb(rng)), "strokes": [], "effects": []},
            ],
        })
    else:
        children.append(_rect("portrait", wob(20), wob(48), 280, 200, _rgb(rng)))
    if has_rules:
        children.append({"type": "ELLIPSE", "name": "element_badge", "x": 276,
                         "y": 48, "width": 28, "height": 28,
                         "fills": _solid(_rgb(rng)), "strokes": [], "effects": []})
        children.append({
            "type": "FRAME", "name": "stats_panel", "x": 20, "y": wob(260),
            "width": 280, "height": 150,
            "fills": _solid({"r": 20, "g": 20, "b": 28, "a": 0.9}),
            "strokes": [], "effects": [],
            "children": (
                _bar("hp", 18, hp, rng) + _bar("atk", 58, 0, rng)
                + _bar("def", 98, 0, rng)
            ),
        })
        children.append(_text("hp_value", str(hp), 258, 276, 46, 14, 10.0))
    else:
        # without the naming rules the stats come out as loose text
        children.append(_text("stats", f"HP {hp} ATK {rng.randint(40, 999)}",
                              20, wob(270), 280, 20, 11.0))
    doc = {
        "type": "FRAME", "name": "character_card", "x": 0, "y": 0,
        "width": 320, "height": 450,
        "fills": _solid({"r": 18, "g": 18, "b": 24, "a": 1.0}),
        "strokes": [], "effects": [], "children": children,
        "template": "character_card",
    }
    m = re.search(r"\b(N|R|SR|SSR|UR)\b rarity", prompt)
    if m:
        doc["rarity"] = m.group(1)
    m = re.search(r"\b(Fire|Water|Wind|Light|Dark)\b", prompt)
    if m:
        doc["element"] = m.group(1)
    return json.dumps(doc, indent=2)


def _fabricate_item(title: str, rng: random.Random, wob) -> str:
    doc = {
        "type": "FRAME", "name": "item_thumbnail", "x": 0, "y": 0,
        "width": 96, "height": 96,
        "fills": _solid({"r": 24, "g": 26, "b": 34, "a": 1.0}),
        "strokes": [], "effects": [],
        "children": [
            _rect("icon_base", wob(16), wob(16), 64, 64, _rgb(rng)),
            _text("count_text", f"x{rng.randint(1, 99)}", 56, 74, 32, 16, 10.0),
        ],
        "template": "item_thumbnail",
    }
    return json.dumps(doc, indent=2)


def _fabricate_skill(title: str, rng: random.Random, wob) -> str:
    rows = []
    for i in range(1, 4):
        rows.append(_text(f"skill_{i}_name", f"{title} {i}", 16, 60 + 88 * (i - 1),
                          180, 18, 12.0))
        rows.append(_text(f"skill_{i}_desc", "Deals damage to one enemy.",
                          16, 80 + 88 * (i - 1), 248, 30, 9.0,
                          {"r": 180, "g": 180, "b": 190, "a": 1.0}))
        rows.append(_text(f"skill_{i}_cooldown", f"CD {rng.randint(1, 9)}",
                          220, 60 + 88 * (i - 1), 44, 18, 10.0))
    doc = {
        "type": "FRAME", "name": "skill_panel", "x": 0, "y": 0,
        "width": 280, "height": 360,
        "fills": _solid({"r": 22, "g": 24, "b": 32, "a": 1.0}),
        "strokes": [], "effects": [],
        "children": [
            _rect("panel_bg", 0, 0, 280, 360, {"r": 30, "g": 32, "b": 44, "a": 1.0}),
            _text("title_text", title, wob(16), 16, 200, 26, 16.0),
            *rows,
        ],
        "template": "skill_panel",
    }
    return json.dumps(doc, indent=2)
