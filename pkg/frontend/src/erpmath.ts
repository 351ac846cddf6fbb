// Client-side mirror of the server's equirectangular conventions:
// half-pixel centers, longitude in [-pi, pi) growing left to right,
// latitude in [-pi/2, pi/2] with row 0 northernmost.

export interface Spherical {
  theta: number;
  phi: number;
}

export function wrapLongitude(theta: number): number {
  let t = (theta + Math.PI) % (2 * Math.PI);
  if (t < 0) t += 2 * Math.PI;
  t -= Math.PI;
  return t >= Math.PI ? -Math.PI : t;
}

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}

/** Spherical coordinate of a (fractional) pixel position in a w x h viewport. */
export function pixelToSpherical(x: number, y: number, w: number, h: number): Spherical {
  return {
    theta: (2 * Math.PI * (x + 0.5)) / w - Math.PI,
    phi: Math.PI / 2 - (Math.PI * (y + 0.5)) / h,
  };
}

/** Inverse of pixelToSpherical (fractional pixel coordinates). */
export function sphericalToPixel(c: Spherical, w: number, h: number): { x: number; y: number } {
  return {
    x: ((c.theta + Math.PI) * w) / (2 * Math.PI) - 0.5,
    y: ((Math.PI / 2 - c.phi) * h) / Math.PI - 0.5,
  };
}
