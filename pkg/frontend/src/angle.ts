/** Angle math shared between input capture and the scene layout.
 *
 * Angles follow the mathematical convention (y-up, counterclockwise
 * positive, 0 pointing right); screen coordinates are y-down, so pointer
 * angles negate the vertical component.
 */

export const TWO_PI = 2 * Math.PI;

/** Normalize any angle into [0, 2*pi). */
export function normalizeAngle(angle: number): number {
  const a = angle % TWO_PI;
  return a < 0 ? a + TWO_PI : a;
}

/** Circular distance between two angles, in [0, pi]. */
export function circularDistance(a: number, b: number): number {
  const d = Math.abs(normalizeAngle(a) - normalizeAngle(b));
  return Math.min(d, TWO_PI - d);
}

/**
 * Nearest registered symbol angle; ties resolve to the lower index.
 * Must agree with the server's mapping rule (shared test vectors).
 */
export function nearestSymbol(angle: number, symbolAngles: readonly number[]): number {
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < symbolAngles.length; i++) {
    const d = circularDistance(angle, symbolAngles[i]);
    if (d < bestDist - 1e-15) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

export interface Point {
  x: number;
  y: number;
}

/**
 * Angle from screen center to a pointer position, or null inside the dead
 * zone (the angle is undefined at the exact center).
 */
export function pointerAngle(center: Point, pointer: Point, deadZone = 10): number | null {
  const dx = pointer.x - center.x;
  const dy = -(pointer.y - center.y); // screen y is down
  if (Math.hypot(dx, dy) < deadZone) {
    return null;
  }
  return normalizeAngle(Math.atan2(dy, dx));
}
