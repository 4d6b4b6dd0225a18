import { describe, expect, it } from "vitest";

import { gradientAngleToTransform, gradientT } from "../src/gradient";

describe("gradientAngleToTransform", () => {
  it("maps 0 degrees to the identity (left to right)", () => {
    const m = gradientAngleToTransform(0);
    expect(m[0][0]).toBeCloseTo(1, 12);
    expect(m[0][1]).toBeCloseTo(0, 12);
    expect(m[0][2]).toBeCloseTo(0, 12);
    expect(gradientT(m, 0, 0.3)).toBeCloseTo(0, 12);
    expect(gradientT(m, 1, 0.7)).toBeCloseTo(1, 12);
  });

  it("maps 90 degrees to a top-to-bottom run (y grows downward)", () => {
    const m = gradientAngleToTransform(90);
    // t depends only on y: 0 along the top edge, 1 along the bottom
    for (const x of [0, 0.25, 1]) {
      expect(gradientT(m, x, 0)).toBeCloseTo(0, 12);
      expect(gradientT(m, x, 1)).toBeCloseTo(1, 12);
    }
    expect(m[0][0]).toBeCloseTo(0, 12);
    expect(m[0][1]).toBeCloseTo(1, 12);
    expect(m[1]).toEqual([-1, expect.closeTo(0, 12), 1]);
  });

  it("maps 180 degrees to right-to-left", () => {
    const m = gradientAngleToTransform(180);
    expect(gradientT(m, 1, 0.5)).toBeCloseTo(0, 12);
    expect(gradientT(m, 0, 0.5)).toBeCloseTo(1, 12);
  });

  it("runs 45 degrees corner to corner", () => {
    const m = gradientAngleToTransform(45);
    expect(gradientT(m, 0, 0)).toBeCloseTo(0, 12);
    expect(gradientT(m, 1, 1)).toBeCloseTo(1, 12);
    // the cross-diagonal corners sit halfway
    expect(gradientT(m, 1, 0)).toBeCloseTo(0.5, 12);
    expect(gradientT(m, 0, 1)).toBeCloseTo(0.5, 12);
  });

  it("spans exactly [0, 1] over the unit square at any angle", () => {
    // same normalization the service rasterizer applies to its bbox
    const corners: Array<[number, number]> = [
      [0, 0],
      [1, 0],
      [0, 1],
      [1, 1],
    ];
    for (let angle = 0; angle < 360; angle += 7.5) {
      const m = gradientAngleToTransform(angle);
      const ts = corners.map(([x, y]) => gradientT(m, x, y));
      expect(Math.min(...ts)).toBeCloseTo(0, 12);
      expect(Math.max(...ts)).toBeCloseTo(1, 12);
    }
  });

  it("always yields an invertible matrix", () => {
    for (let angle = 0; angle < 360; angle += 15) {
      const [[a, b], [d, e]] = gradientAngleToTransform(angle);
      expect(Math.abs(a * e - b * d)).toBeGreaterThan(1e-9);
    }
  });
});
