// DOM wiring: one or two panels (side-by-side kernel comparison), pointer
// drag to rotate, wheel to zoom at the cursor, URL-hash state sharing.

import { FrameScheduler } from "./fetcher.js";
import {
  applyDrag,
  applyScroll,
  fromHash,
  identityState,
  KernelName,
  toHash,
  ViewState,
  withKernel,
} from "./viewstate.js";

// same-origin by default; override with ?api=http://host:port when the
// viewer statics are served separately from the warp service
const API_BASE = new URLSearchParams(location.search).get("api") ?? "";

interface Panel {
  img: HTMLImageElement;
  scheduler: FrameScheduler;
  objectUrl: string | null;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

async function fetchFrame(url: string): Promise<Blob> {
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`warp request failed: ${resp.status}`);
  return resp.blob();
}

function makePanel(img: HTMLImageElement, banner: HTMLElement): Panel {
  const panel: Panel = { img, scheduler: undefined as unknown as FrameScheduler, objectUrl: null };
  panel.scheduler = new FrameScheduler(API_BASE, fetchFrame, {
    onFrame: (frame) => {
      banner.hidden = true;
      const url = URL.createObjectURL(frame.body as Blob);
      if (panel.objectUrl) URL.revokeObjectURL(panel.objectUrl);
      panel.objectUrl = url;
      img.src = url;
    },
    onError: () => {
      banner.hidden = false; // non-blocking: state stays as-is
    },
  });
  return panel;
}

function main(): void {
  const viewerImg = byId<HTMLImageElement>("viewer");
  const compareImg = byId<HTMLImageElement>("viewer-compare");
  const overlay = byId<HTMLDivElement>("overlay");
  const banner = byId<HTMLDivElement>("banner");
  const kernelSelect = byId<HTMLSelectElement>("kernel");
  const compareSelect = byId<HTMLSelectElement>("kernel-compare");
  const compareToggle = byId<HTMLInputElement>("compare-toggle");

  const main_panel = makePanel(viewerImg, banner);
  const compare_panel = makePanel(compareImg, banner);

  let state: ViewState = identityState("", 512, 256);
  let dragging = false;
  let lastX = 0;
  let lastY = 0;

  function compareState(): ViewState {
    return withKernel(state, compareSelect.value as KernelName);
  }

  function render(preview: boolean): void {
    overlay.textContent =
      `yaw ${state.yaw.toFixed(3)}  pitch ${state.pitch.toFixed(3)}  ` +
      `zoom ${state.zoomFactor.toFixed(2)}x  kernel ${state.kernel}`;
    main_panel.scheduler.request(state, preview);
    if (compareToggle.checked) {
      compare_panel.scheduler.request(compareState(), preview);
    }
    history.replaceState(null, "", toHash(state));
  }

  function setState(next: ViewState, preview = false): void {
    state = next;
    render(preview);
  }

  viewerImg.addEventListener("pointerdown", (ev) => {
    dragging = true;
    lastX = ev.clientX;
    lastY = ev.clientY;
    viewerImg.setPointerCapture(ev.pointerId);
  });
  viewerImg.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    const dx = ev.clientX - lastX;
    const dy = ev.clientY - lastY;
    lastX = ev.clientX;
    lastY = ev.clientY;
    setState(applyDrag(state, dx, dy), true);
  });
  viewerImg.addEventListener("pointerup", (ev) => {
    dragging = false;
    viewerImg.releasePointerCapture(ev.pointerId);
    render(false); // full resolution on release
    main_panel.scheduler.flush();
  });
  viewerImg.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = viewerImg.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * state.viewportW;
    const y = ((ev.clientY - rect.top) / rect.height) * state.viewportH;
    setState(applyScroll(state, ev.deltaY, x, y));
  }, { passive: false });

  kernelSelect.addEventListener("change", () => {
    setState(withKernel(state, kernelSelect.value as KernelName));
  });
  compareSelect.addEventListener("change", () => render(false));
  compareToggle.addEventListener("change", () => {
    compareImg.parentElement!.classList.toggle("hidden", !compareToggle.checked);
    render(false);
  });
  window.addEventListener("hashchange", () => {
    const restored = fromHash(location.hash);
    if (restored) {
      state = restored;
      kernelSelect.value = restored.kernel;
      render(false);
    }
  });

  void (async () => {
    const restored = fromHash(location.hash);
    if (restored) {
      state = restored;
      kernelSelect.value = restored.kernel;
      render(false);
      return;
    }
    const resp = await fetch(`${API_BASE}/api/panoramas`);
    const panos = (await resp.json()) as { id: string; width: number; height: number }[];
    if (!panos.length) {
      banner.hidden = false;
      banner.textContent = "no panoramas on the server";
      return;
    }
    state = identityState(panos[0].id,
                          Math.min(panos[0].width, 1024),
                          Math.min(panos[0].height, 512));
    render(false);
  })();
}

main();
