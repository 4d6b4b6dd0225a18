// Fetches a finalized Design Spec JSON from the service and rebuilds it as
// an editable node tree on the current page.
//
// Guarantees:
//   - additive: pre-existing document content is never touched;
//   - atomic: on any failure every node created so far is removed, so a
//     failed import leaves the document exactly as it was;
//   - names are copied verbatim, keeping rarity_star_* / *_bar_fill nodes
//     addressable after import;
//   - features Figma cannot express one-to-one (per-layer stroke weights,
//     glow effects, unknown paint kinds) are downgraded, never fatal, and
//     each downgrade is reported as a warning.

import { gradientAngleToTransform } from "./gradient";
import {
  countNodes,
  hasTextNodes,
  parseSpecText,
  SpecFormatError,
  WireEffect,
  WireNode,
  WirePaint,
} from "./spec";

export interface ImportReport {
  nodesCreated: number;
  warnings: string[];
}

export class ImportError extends Error {}

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
}>;

export interface ImporterDeps {
  figma: PluginAPI;
  fetchFn: FetchLike;
}

// All spec text renders with one face; the service's glyph raster has no
// font notion at all, so any clean UI font is faithful.
const BODY_FONT: FontName = { family: "Inter", style: "Regular" };

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

function toFigmaColor(c: { r: number; g: number; b: number }): RGB {
  return { r: c.r, g: c.g, b: c.b };
}

function convertPaint(
  paint: WirePaint,
  nodeName: string,
  warnings: string[]
): Paint | null {
  if (paint.kind === "solid" && paint.color) {
    return {
      type: "SOLID",
      color: toFigmaColor(paint.color),
      opacity: paint.color.a,
    };
  }
  if (paint.kind === "linear_gradient" && paint.stops) {
    return {
      type: "GRADIENT_LINEAR",
      gradientTransform: gradientAngleToTransform(paint.angle_degrees ?? 90),
      gradientStops: paint.stops.map((stop) => ({
        position: stop.position,
        color: { ...toFigmaColor(stop.color), a: stop.color.a },
      })),
    };
  }
  warnings.push(
    `dropped unsupported paint kind ${JSON.stringify(paint.kind)} on "${nodeName}"`
  );
  return null;
}

function convertEffect(
  effect: WireEffect,
  nodeName: string,
  warnings: string[]
): Effect | null {
  if (effect.kind !== "drop_shadow" && effect.kind !== "glow") {
    warnings.push(
      `dropped unsupported effect kind ${JSON.stringify(effect.kind)} on "${nodeName}"`
    );
    return null;
  }
  // Figma has no outer-glow effect; a glow becomes a zero-offset shadow.
  if (effect.kind === "glow") {
    warnings.push(
      `glow on "${nodeName}" approximated as a zero-offset drop shadow`
    );
  }
  const isGlow = effect.kind === "glow";
  return {
    type: "DROP_SHADOW",
    color: { ...toFigmaColor(effect.color), a: effect.color.a },
    offset: isGlow
      ? { x: 0, y: 0 }
      : { x: effect.offset_x, y: effect.offset_y },
    radius: effect.blur_radius,
    visible: true,
    blendMode: "NORMAL",
  };
}

function applyStrokes(
  live: SceneNode,
  wire: WireNode,
  warnings: string[]
): void {
  const paints: Paint[] = [];
  for (const layer of wire.strokes) {
    const paint = convertPaint(layer, wire.name, warnings);
    if (paint) paints.push(paint);
  }
  live.strokes = paints;
  if (wire.strokes.length === 0) return;

  // One weight per node in Figma; the spec allows one per layer. Use the
  // outermost layer's weight and flag the loss when they differ. Strokes
  // draw inside the bounds, matching the service rasterizer.
  const weights = wire.strokes.map((layer) => layer.weight);
  live.strokeWeight = weights[0];
  live.strokeAlign = "INSIDE";
  if (new Set(weights).size > 1) {
    warnings.push(
      `stroke weights [${weights.join(", ")}] on "${wire.name}" differ; ` +
        `Figma supports one weight per node — using ${weights[0]}`
    );
  }
}

function instantiate(wire: WireNode, figma: PluginAPI): SceneNode {
  switch (wire.type) {
    case "FRAME":
      return figma.createFrame();
    case "RECTANGLE":
      return figma.createRectangle();
    case "ELLIPSE":
      return figma.createEllipse();
    case "TEXT":
      return figma.createText();
  }
}

function buildNode(
  wire: WireNode,
  figma: PluginAPI,
  report: ImportReport
): SceneNode {
  const live = instantiate(wire, figma);
  try {
    live.name = wire.name;
    live.resize(wire.width, wire.height);
    live.x = wire.x;
    live.y = wire.y;

    const fills: Paint[] = [];
    for (const paint of wire.fills) {
      const converted = convertPaint(paint, wire.name, report.warnings);
      if (converted) fills.push(converted);
    }
    live.fills = fills; // empty array clears the default frame background

    applyStrokes(live, wire, report.warnings);

    const effects: Effect[] = [];
    for (const effect of wire.effects) {
      const converted = convertEffect(effect, wire.name, report.warnings);
      if (converted) effects.push(converted);
    }
    live.effects = effects;

    if (wire.type === "TEXT") {
      const text = live as TextNode;
      text.fontName = BODY_FONT;
      text.characters = wire.characters ?? "";
      if (wire.font_size && wire.font_size > 0) {
        text.fontSize = wire.font_size;
      }
      text.textAutoResize = "NONE";
      text.resize(wire.width, wire.height);
    }

    for (const childWire of wire.children ?? []) {
      const child = buildNode(childWire, figma, report);
      (live as FrameNode).appendChild(child);
    }
  } catch (err) {
    // children already appended travel with the subtree removal
    live.remove();
    throw err;
  }
  report.nodesCreated += 1;
  return live;
}

/**
 * Import the spec served at specUrl (GET /api/spec/{id}) onto the current
 * page. Network, HTTP, and format failures throw ImportError before any
 * node is created; mid-build failures remove everything created so far.
 */
export async function importSpec(
  specUrl: string,
  deps: ImporterDeps
): Promise<ImportReport> {
  const { figma, fetchFn } = deps;

  let response;
  try {
    response = await fetchFn(specUrl);
  } catch (err) {
    throw new ImportError(
      `service unreachable at ${specUrl}: ${describe(err)}`
    );
  }
  if (!response.ok) {
    let detail = "";
    try {
      const body = JSON.parse(await response.text());
      if (typeof body?.error === "string") detail = `: ${body.error}`;
    } catch {
      // non-JSON error body; the status code is the message
    }
    throw new ImportError(
      `service returned HTTP ${response.status} for ${specUrl}${detail}`
    );
  }

  let root: WireNode;
  try {
    root = parseSpecText(await response.text());
  } catch (err) {
    if (err instanceof SpecFormatError) throw new ImportError(err.message);
    throw err;
  }

  // Fonts load before any node exists, so a missing font mutates nothing.
  if (hasTextNodes(root)) await figma.loadFontAsync(BODY_FONT);

  const report: ImportReport = { nodesCreated: 0, warnings: [] };
  let live: SceneNode;
  try {
    live = buildNode(root, figma, report);
  } catch (err) {
    throw new ImportError(`import failed, document left unchanged: ${describe(err)}`);
  }
  figma.currentPage.appendChild(live);

  if (report.nodesCreated !== countNodes(root)) {
    // buildNode counts every node it creates; a mismatch is a bridge bug
    report.warnings.push(
      `created ${report.nodesCreated} nodes but the spec declares ${countNodes(root)}`
    );
  }
  return report;
}
