// Wire format of the Design Spec JSON served by GET /api/spec/{id}.
// The service only serves specs that already passed validation, so parsing
// here checks structure (enough to build nodes safely), not design rules.

export interface WireColor {
  r: number;
  g: number;
  b: number;
  a: number;
}

export interface WireStop {
  position: number;
  color: WireColor;
}

export interface WirePaint {
  kind: string; // "solid" | "linear_gradient"; unknown kinds are downgraded
  color?: WireColor;
  angle_degrees?: number;
  stops?: WireStop[];
}

/** A stroke layer is a paint plus its own weight. */
export interface WireStroke extends WirePaint {
  weight: number;
}

export interface WireEffect {
  kind: string; // "drop_shadow" | "glow"
  color: WireColor;
  offset_x: number;
  offset_y: number;
  blur_radius: number;
}

export interface WireNode {
  type: "FRAME" | "RECTANGLE" | "ELLIPSE" | "TEXT";
  name: string;
  x: number;
  y: number;
  width: number;
  height: number;
  fills: WirePaint[];
  strokes: WireStroke[];
  effects: WireEffect[];
  children?: WireNode[];
  characters?: string;
  font_size?: number;
}

export class SpecFormatError extends Error {}

const NODE_TYPES = new Set(["FRAME", "RECTANGLE", "ELLIPSE", "TEXT"]);

function fail(path: string, reason: string): never {
  throw new SpecFormatError(`bad spec at ${path}: ${reason}`);
}

function checkNode(raw: any, path: string): WireNode {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(path, "node must be an object");
  }
  if (!NODE_TYPES.has(raw.type)) {
    fail(path, `unknown node type ${JSON.stringify(raw.type)}`);
  }
  if (typeof raw.name !== "string") fail(path, "name must be a string");
  for (const key of ["x", "y", "width", "height"] as const) {
    if (typeof raw[key] !== "number" || !isFinite(raw[key])) {
      fail(path, `${key} must be a finite number`);
    }
  }
  for (const key of ["fills", "strokes", "effects"] as const) {
    if (!Array.isArray(raw[key])) fail(path, `${key} must be an array`);
  }
  if (raw.children !== undefined) {
    if (raw.type !== "FRAME") fail(path, "only FRAME nodes carry children");
    if (!Array.isArray(raw.children)) fail(path, "children must be an array");
    raw.children.forEach((child: any, i: number) =>
      checkNode(child, `${path}.children[${i}]`)
    );
  }
  if (raw.type === "TEXT" && raw.characters !== undefined) {
    if (typeof raw.characters !== "string") {
      fail(path, "characters must be a string");
    }
  }
  return raw as WireNode;
}

/** Parse the canonical spec text; throws SpecFormatError on anything off. */
export function parseSpecText(text: string): WireNode {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SpecFormatError(
      `response is not JSON: ${err instanceof Error ? err.message : String(err)}`
    );
  }
  return checkNode(doc, "$");
}

/** Total node count, root included — the number an import must recreate. */
export function countNodes(node: WireNode): number {
  let total = 1;
  for (const child of node.children ?? []) total += countNodes(child);
  return total;
}

/** True if any node in the tree is TEXT (decides whether to load a font). */
export function hasTextNodes(node: WireNode): boolean {
  if (node.type === "TEXT") return true;
  return (node.children ?? []).some(hasTextNodes);
}
