export * from "./types.js";
export * from "./angle.js";
export * from "./scene.js";
export * from "./client.js";
export * from "./input.js";
export * from "./calibration.js";
export * from "./render.js";
