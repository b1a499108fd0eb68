/** Pure scene-graph layout for the radial query display.
 *
 * The root sits at the screen center; every leaf is placed in polar
 * coordinates with radius growing with its tree depth.  Layout is a pure
 * function of (payload, previous scene), so it snapshot-tests cleanly and
 * the renderer stays a thin canvas pass.
 */

import { TWO_PI, normalizeAngle } from "./angle.js";
import type { LeafKind, LeafRecord, QueryPayload } from "./types.js";

export class SceneError extends Error {}

export interface PolarPosition {
  angle: number;
  radius: number;
}

export interface SceneNode extends PolarPosition {
  prefix: string;
  label: string;
  kind: LeafKind;
  depth: number;
  mass: number;
  size: number;
  symbol: number | null;
  symbolAngle: number | null;
  /** Animation origin: where this node's region lived in the previous
   * query, or null for a fade-in. */
  from: PolarPosition | null;
}

export interface SceneGraph {
  trialIndex: number;
  rootLabel: string;
  decidedText: string;
  nodes: SceneNode[];
  capacityBits: number;
  expectedInformationBits: number;
}

const BASE_RADIUS = 90;
const RADIUS_STEP = 55;
const TOP_ANGLE = Math.PI / 2;
const RUN_SPREAD = 0.12; // radians between same-symbol neighbors
const LEAF_KINDS: readonly string[] = ["plain", "wildcard", "goback", "stop"];

function validate(payload: QueryPayload): void {
  if (!payload || typeof payload.root_prefix !== "string" || !Array.isArray(payload.leafs)) {
    throw new SceneError("malformed query payload");
  }
  for (const leaf of payload.leafs) {
    if (typeof leaf.prefix !== "string" || !LEAF_KINDS.includes(leaf.kind)) {
      throw new SceneError(`malformed leaf record: ${JSON.stringify(leaf)}`);
    }
    if (!Number.isFinite(leaf.mass) || leaf.mass < -1e-9) {
      throw new SceneError(`leaf ${leaf.prefix} has invalid mass ${leaf.mass}`);
    }
  }
}

function leafDepth(leaf: LeafRecord, rootPrefix: string): number {
  if (leaf.kind === "goback") {
    return 0;
  }
  const anchor = leaf.covered.length > 0 ? leaf.covered[0] : leaf.prefix;
  return Math.max(1, anchor.length - rootPrefix.length);
}

function leafLabel(leaf: LeafRecord, rootPrefix: string): string {
  if (leaf.kind === "goback") {
    return "back";
  }
  const suffix = (leaf.prefix.slice(rootPrefix.length) || leaf.prefix).replace(/ /g, "␣");
  return leaf.kind === "wildcard" ? `${suffix}+` : suffix;
}

function nodeSize(mass: number): number {
  // log scale keeps tiny-mass leafs legible
  return 6 + 14 * (Math.log10(1 + 99 * Math.max(mass, 0)) / 2);
}

/** True when leaf order maps to non-decreasing symbol angles (the display
 * constraint of monotonic coding). */
export function isMonotonicPayload(payload: QueryPayload): boolean {
  let last = -Infinity;
  for (const leaf of payload.leafs) {
    if (leaf.angle === null) {
      return false;
    }
    if (leaf.angle < last - 1e-12) {
      return false;
    }
    last = leaf.angle;
  }
  return payload.leafs.length > 0;
}

function displayAngles(payload: QueryPayload): number[] {
  const leafs = payload.leafs;
  if (isMonotonicPayload(payload)) {
    // place each leaf near its symbol's angle, spreading same-symbol runs
    const out: number[] = [];
    let i = 0;
    while (i < leafs.length) {
      let j = i;
      while (j < leafs.length && leafs[j].symbol === leafs[i].symbol) {
        j++;
      }
      const runSize = j - i;
      const center = leafs[i].angle as number;
      for (let k = 0; k < runSize; k++) {
        out.push(normalizeAngle(center + (k - (runSize - 1) / 2) * RUN_SPREAD));
      }
      i = j;
    }
    return out;
  }
  // otherwise: even clockwise spacing from the top, in payload (clockwise)
  // order; clockwise on a y-up canvas means decreasing angle
  return leafs.map((_, i) => normalizeAngle(TOP_ANGLE - (i * TWO_PI) / Math.max(leafs.length, 1)));
}

export function layoutScene(payload: QueryPayload, previous?: SceneGraph): SceneGraph {
  validate(payload);
  const prevByPrefix = new Map<string, SceneNode>();
  if (previous) {
    for (const node of previous.nodes) {
      prevByPrefix.set(node.prefix, node);
    }
  }
  const angles = displayAngles(payload);
  const nodes: SceneNode[] = payload.leafs.map((leaf, i) => {
    const depth = leafDepth(leaf, payload.root_prefix);
    const radius = depth === 0 ? BASE_RADIUS : BASE_RADIUS + RADIUS_STEP * (depth - 1);
    const origin = leaf.parent_leaf_prev !== null ? prevByPrefix.get(leaf.parent_leaf_prev) : undefined;
    return {
      prefix: leaf.prefix,
      label: leafLabel(leaf, payload.root_prefix),
      kind: leaf.kind,
      depth,
      angle: angles[i],
      radius,
      mass: leaf.mass,
      size: nodeSize(leaf.mass),
      symbol: leaf.symbol,
      symbolAngle: leaf.angle,
      from: origin ? { angle: origin.angle, radius: origin.radius } : null,
    };
  });
  return {
    trialIndex: payload.trial_index,
    rootLabel: payload.root_prefix === "" ? "∅" : payload.root_prefix.replace(/ /g, "␣"),
    decidedText: payload.decided_text,
    nodes,
    capacityBits: payload.capacity_bits,
    expectedInformationBits: payload.expected_information_bits,
  };
}
