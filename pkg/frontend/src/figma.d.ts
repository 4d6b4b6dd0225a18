// Hand-rolled ambient typings for the slice of the Figma plugin API this
// plugin touches. Kept deliberately narrow so the test fake can implement
// the same surface; not a substitute for @figma/plugin-typings.

interface RGB {
  r: number;
  g: number;
  b: number;
}

interface RGBA extends RGB {
  a: number;
}

/** Row-major 2x3 affine matrix, as used by gradientTransform. */
type Transform = [[number, number, number], [number, number, number]];

interface ColorStop {
  position: number;
  color: RGBA;
}

interface SolidPaint {
  type: "SOLID";
  color: RGB;
  opacity?: number;
}

interface GradientPaint {
  type: "GRADIENT_LINEAR";
  gradientTransform: Transform;
  gradientStops: ColorStop[];
}

type Paint = SolidPaint | GradientPaint;

interface DropShadowEffect {
  type: "DROP_SHADOW";
  color: RGBA;
  offset: { x: number; y: number };
  radius: number;
  visible: boolean;
  blendMode: "NORMAL";
}

type Effect = DropShadowEffect;

interface FontName {
  family: string;
  style: string;
}

interface SceneNode {
  readonly type: string;
  name: string;
  x: number;
  y: number;
  readonly width: number;
  readonly height: number;
  fills: ReadonlyArray<Paint>;
  strokes: ReadonlyArray<Paint>;
  strokeWeight: number;
  strokeAlign: "CENTER" | "INSIDE" | "OUTSIDE";
  effects: ReadonlyArray<Effect>;
  resize(width: number, height: number): void;
  remove(): void;
}

interface FrameNode extends SceneNode {
  readonly children: ReadonlyArray<SceneNode>;
  appendChild(child: SceneNode): void;
}

interface RectangleNode extends SceneNode {}

interface EllipseNode extends SceneNode {}

interface TextNode extends SceneNode {
  characters: string;
  fontSize: number;
  fontName: FontName;
  textAutoResize: "NONE" | "WIDTH" | "HEIGHT" | "WIDTH_AND_HEIGHT";
}

interface PageNode {
  readonly type: "PAGE";
  readonly children: ReadonlyArray<SceneNode>;
  appendChild(child: SceneNode): void;
}

interface NotificationOptions {
  error?: boolean;
  timeout?: number;
}

interface UIAPI {
  onmessage: ((msg: any) => void) | undefined;
  postMessage(msg: any): void;
}

interface PluginAPI {
  readonly currentPage: PageNode;
  createFrame(): FrameNode;
  createRectangle(): RectangleNode;
  createEllipse(): EllipseNode;
  createText(): TextNode;
  loadFontAsync(fontName: FontName): Promise<void>;
  notify(message: string, options?: NotificationOptions): void;
  showUI(html: string, options?: { width?: number; height?: number }): void;
  closePlugin(message?: string): void;
  readonly ui: UIAPI;
}

declare const figma: PluginAPI;
declare const __html__: string;

declare const console: {
  log(...args: unknown[]): void;
  warn(...args: unknown[]): void;
  error(...args: unknown[]): void;
};

/** The plugin sandbox exposes fetch; typed minimally for what we use. */
declare function fetch(url: string): Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
}>;
