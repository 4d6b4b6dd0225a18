// Angle -> gradientTransform conversion.
//
// The spec stores a linear gradient as an angle in degrees; Figma stores a
// 2x3 affine matrix mapping the node's normalized [0,1]^2 space into
// gradient space, where the blend runs t = 0 -> 1 along the x axis.
//
// The service rasterizer resolves an angle as the direction
// (cos(theta), sin(theta)) with y growing downward (so 90 deg runs top to
// bottom), then normalizes the signed projection so t spans exactly [0,1]
// over the node's bounding box. This module applies the same convention:
//
//   t(x, y) = (x*cos + y*sin - smin) / (smax - smin)
//
// where smin/smax are the min/max projections of the four unit-square
// corners. The matrix's second row is the perpendicular axis, centered on
// the box; it only matters for non-linear gradients but must keep the 2x2
// part invertible (its determinant is 1/(smax - smin) > 0).
//
// Sanity anchors: 0 deg -> identity (left to right), 90 deg ->
// [[0,1,0],[-1,0,1]] (top to bottom).

export function gradientAngleToTransform(angleDegrees: number): Transform {
  const theta = (angleDegrees * Math.PI) / 180;
  const cos = Math.cos(theta);
  const sin = Math.sin(theta);
  const corners = [0, cos, sin, cos + sin];
  const smin = Math.min(...corners);
  const smax = Math.max(...corners);
  const k = 1 / (smax - smin); // span >= 1/sqrt(2), never zero
  return [
    [cos * k, sin * k, -smin * k],
    [-sin, cos, 0.5 * (1 + sin - cos)],
  ];
}

/** The t-value the transform assigns to a normalized point — test hook. */
export function gradientT(transform: Transform, x: number, y: number): number {
  const [a, b, c] = transform[0];
  return a * x + b * y + c;
}
