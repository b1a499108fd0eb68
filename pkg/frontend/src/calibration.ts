/** Calibration: prompt the user to point at randomized target symbols,
 * tally which symbol their pointing resolved to, and produce the count
 * matrix the channel-registration endpoint expects (counts[x][x_hat]).
 */

import { nearestSymbol } from "./angle.js";

export class CalibrationError extends Error {}

/** Deterministic PRNG (mulberry32) so calibration schedules replay in tests. */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface CalibrationRound {
  target: number;
  committedAngle: number | null;
}

export class CalibrationSession {
  private readonly rounds: CalibrationRound[] = [];
  private readonly schedule: number[];
  private cursor = 0;

  constructor(
    readonly symbolAngles: readonly number[],
    roundsPerSymbol: number,
    seed = 1,
  ) {
    if (symbolAngles.length < 2) {
      throw new CalibrationError("need at least two symbols to calibrate");
    }
    if (roundsPerSymbol < 1) {
      throw new CalibrationError("roundsPerSymbol must be >= 1");
    }
    // every symbol appears equally often, in shuffled order
    const schedule: number[] = [];
    for (let r = 0; r < roundsPerSymbol; r++) {
      for (let s = 0; s < symbolAngles.length; s++) {
        schedule.push(s);
      }
    }
    const rand = seededRandom(seed);
    for (let i = schedule.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [schedule[i], schedule[j]] = [schedule[j], schedule[i]];
    }
    this.schedule = schedule;
  }

  get done(): boolean {
    return this.cursor >= this.schedule.length;
  }

  get remaining(): number {
    return this.schedule.length - this.cursor;
  }

  /** Symbol index the user should point at next. */
  currentTarget(): number {
    if (this.done) {
      throw new CalibrationError("calibration already complete");
    }
    return this.schedule[this.cursor];
  }

  /** Record the committed pointing angle for the current target. */
  record(angle: number): void {
    this.rounds.push({ target: this.currentTarget(), committedAngle: angle });
    this.cursor++;
  }

  /** Skip the current target (e.g. the user gave up on the round). */
  skip(): void {
    this.rounds.push({ target: this.currentTarget(), committedAngle: null });
    this.cursor++;
  }

  /** counts[x][x_hat]: rounds where symbol x was the target and the
   * committed angle resolved nearest to symbol x_hat. */
  counts(): number[][] {
    const n = this.symbolAngles.length;
    const counts = Array.from({ length: n }, () => new Array<number>(n).fill(0));
    for (const round of this.rounds) {
      if (round.committedAngle !== null) {
        counts[round.target][nearestSymbol(round.committedAngle, this.symbolAngles)]++;
      }
    }
    return counts;
  }

  /** Request body for the channel-registration endpoint. */
  channelRequest(smooth = true): { counts: number[][]; smooth: boolean; angles: number[] } {
    if (!this.done) {
      throw new CalibrationError(`calibration has ${this.remaining} rounds left`);
    }
    const counts = this.counts();
    for (let x = 0; x < counts.length; x++) {
      if (counts[x].every((c) => c === 0)) {
        throw new CalibrationError(`symbol ${x} has no recorded rounds; recalibrate`);
      }
    }
    return { counts, smooth, angles: [...this.symbolAngles] };
  }
}
