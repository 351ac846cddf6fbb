// Pure view-state machine: every interaction produces a new state, and the
// warp request URL is a deterministic function of the state, so a restored
// URL hash reproduces request parameters bit-exactly.

import { clamp, pixelToSpherical, Spherical } from "./erpmath.js";

export const PITCH_LIMIT = Math.PI / 2 - 0.01;
export const ZOOM_MIN = 0.25;
export const ZOOM_MAX = 16;
export const SCROLL_GAIN = 0.002; // zoom factor multiplier is exp(-delta * gain)

export type KernelName = "spherical" | "nearest" | "bilinear" | "bicubic";

export interface ViewState {
  panoramaId: string;
  yaw: number;
  pitch: number;
  /** Magnification: > 1 means zoomed in. The server's controls-route zoom
   *  parameter widens the field as it grows, so requests carry 1/zoomFactor. */
  zoomFactor: number;
  zoomCenter: Spherical;
  kernel: KernelName;
  viewportW: number;
  viewportH: number;
}

export function identityState(panoramaId: string, viewportW: number,
                              viewportH: number): ViewState {
  return {
    panoramaId,
    yaw: 0,
    pitch: 0,
    zoomFactor: 1,
    zoomCenter: { theta: 0, phi: 0 },
    kernel: "spherical",
    viewportW,
    viewportH,
  };
}

function clamped(state: ViewState): ViewState {
  return {
    ...state,
    pitch: clamp(state.pitch, -PITCH_LIMIT, PITCH_LIMIT),
    zoomFactor: clamp(state.zoomFactor, ZOOM_MIN, ZOOM_MAX),
  };
}

/** Drag by (dx, dy) screen pixels: a full viewport width of drag at zoom 1
 *  advances yaw by a whole turn; vertical drags tilt, clamped short of the
 *  poles. Pan speed scales down with magnification. */
export function applyDrag(state: ViewState, dx: number, dy: number): ViewState {
  if (dx === 0 && dy === 0) return state;
  return clamped({
    ...state,
    yaw: state.yaw + (dx * (2 * Math.PI / state.viewportW)) / state.zoomFactor,
    pitch: state.pitch + (dy * (Math.PI / state.viewportH)) / state.zoomFactor,
  });
}

/** Scroll by `delta` (wheel deltaY; negative is away/up = zoom in) with the
 *  cursor at viewport pixel (x, y): rescales the magnification and re-centers
 *  the zoom on the cursor's viewport spherical coordinate, which keeps the
 *  content under the cursor fixed while zooming. */
export function applyScroll(state: ViewState, delta: number, x: number,
                            y: number): ViewState {
  if (delta === 0) return state;
  return clamped({
    ...state,
    zoomFactor: state.zoomFactor * Math.exp(-delta * SCROLL_GAIN),
    zoomCenter: pixelToSpherical(x, y, state.viewportW, state.viewportH),
  });
}

export function withKernel(state: ViewState, kernel: KernelName): ViewState {
  return { ...state, kernel };
}

/** Query string of the warp request for this state; key order is fixed.
 *  Preview mode halves the output resolution (used while dragging). */
export function buildWarpQuery(state: ViewState, preview = false): string {
  const w = preview ? Math.max(4, Math.round(state.viewportW / 2)) : state.viewportW;
  const h = preview ? Math.max(2, Math.round(state.viewportH / 2)) : state.viewportH;
  const params = new URLSearchParams();
  params.set("id", state.panoramaId);
  params.set("yaw", String(state.yaw));
  params.set("pitch", String(state.pitch));
  params.set("zoom", String(1 / state.zoomFactor));
  params.set("zoom_center_theta", String(state.zoomCenter.theta));
  params.set("zoom_center_phi", String(state.zoomCenter.phi));
  params.set("kernel", state.kernel);
  params.set("w", String(w));
  params.set("h", String(h));
  return params.toString();
}

const KERNELS: KernelName[] = ["spherical", "nearest", "bilinear", "bicubic"];

/** Hash-fragment serialization; String(number) round-trips doubles exactly. */
export function toHash(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("id", state.panoramaId);
  params.set("yaw", String(state.yaw));
  params.set("pitch", String(state.pitch));
  params.set("zf", String(state.zoomFactor));
  params.set("zct", String(state.zoomCenter.theta));
  params.set("zcp", String(state.zoomCenter.phi));
  params.set("kernel", state.kernel);
  params.set("w", String(state.viewportW));
  params.set("h", String(state.viewportH));
  return "#" + params.toString();
}

export function fromHash(hash: string): ViewState | null {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!raw) return null;
  const params = new URLSearchParams(raw);
  const id = params.get("id");
  if (!id) return null;
  const num = (key: string, fallback: number): number => {
    const v = params.get(key);
    const parsed = v === null ? NaN : Number(v);
    return Number.isFinite(parsed) ? parsed : fallback;
  };
  const kernel = params.get("kernel") as KernelName | null;
  return clamped({
    panoramaId: id,
    yaw: num("yaw", 0),
    pitch: num("pitch", 0),
    zoomFactor: num("zf", 1),
    zoomCenter: { theta: num("zct", 0), phi: num("zcp", 0) },
    kernel: kernel !== null && KERNELS.includes(kernel) ? kernel : "spherical",
    viewportW: Math.max(4, Math.round(num("w", 512))),
    viewportH: Math.max(2, Math.round(num("h", 256))),
  });
}
