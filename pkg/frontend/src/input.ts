/** Pointer input capture: turns pointer movement plus click or dwell into
 * committed pointing angles.
 *
 * The state machine is driven by explicit events with caller-supplied
 * timestamps, so tests can replay traces deterministically without timers.
 */

import { circularDistance, pointerAngle, type Point } from "./angle.js";

export interface InputConfig {
  /** Screen center the angle is measured from. */
  center: Point;
  /** Radius around the center where pointing is ignored. */
  deadZone?: number;
  /** Hold the pointer within `dwellTolerance` radians for this long to
   * commit without clicking.  Zero disables dwell. */
  dwellMs?: number;
  dwellTolerance?: number;
}

export interface Commit {
  angle: number;
  via: "click" | "dwell";
  timeMs: number;
}

interface DwellState {
  anchorAngle: number;
  sinceMs: number;
}

/** Feed pointer/click events in, collect committed angles out. */
export class InputCapture {
  private readonly center: Point;
  private readonly deadZone: number;
  private readonly dwellMs: number;
  private readonly dwellTolerance: number;
  private currentAngle: number | null = null;
  private dwell: DwellState | null = null;

  constructor(
    config: InputConfig,
    private readonly onCommit: (commit: Commit) => void,
  ) {
    this.center = config.center;
    this.deadZone = config.deadZone ?? 10;
    this.dwellMs = config.dwellMs ?? 800;
    this.dwellTolerance = config.dwellTolerance ?? 0.15;
  }

  /** Angle currently being pointed at, or null in the dead zone. */
  get angle(): number | null {
    return this.currentAngle;
  }

  pointerMove(pointer: Point, timeMs: number): void {
    const angle = pointerAngle(this.center, pointer, this.deadZone);
    this.currentAngle = angle;
    if (angle === null) {
      this.dwell = null;
      return;
    }
    if (this.dwellMs <= 0) {
      return;
    }
    if (this.dwell === null || circularDistance(angle, this.dwell.anchorAngle) > this.dwellTolerance) {
      this.dwell = { anchorAngle: angle, sinceMs: timeMs };
      return;
    }
    if (timeMs - this.dwell.sinceMs >= this.dwellMs) {
      this.commit(angle, "dwell", timeMs);
    }
  }

  /** Dwell needs time to pass even while the pointer is still. */
  tick(timeMs: number): void {
    if (this.dwell !== null && this.currentAngle !== null) {
      this.pointerMove(this.pointFor(this.currentAngle), timeMs);
    }
  }

  click(pointer: Point, timeMs: number): void {
    const angle = pointerAngle(this.center, pointer, this.deadZone);
    if (angle !== null) {
      this.commit(angle, "click", timeMs);
    }
  }

  private commit(angle: number, via: Commit["via"], timeMs: number): void {
    this.dwell = null;
    this.onCommit({ angle, via, timeMs });
  }

  private pointFor(angle: number): Point {
    const r = this.deadZone + 50;
    return { x: this.center.x + r * Math.cos(angle), y: this.center.y - r * Math.sin(angle) };
  }
}
