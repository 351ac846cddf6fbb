// End-to-end against a real server: the viewer's identity-state request must
// return pixels equal (post-quantization) to the CLI's identity warp output.
// Spawns `python3 -m omnizoom.cli serve`; the pixel comparison shells out to
// python, where the PNG decoder lives.

import { spawn, execFile } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { buildWarpQuery, identityState } from "../src/viewstate.js";

const PORT = 8911 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;
let serverProc: ReturnType<typeof spawn> | null = null;
let workDir = "";

function runPython(args: string[], timeoutMs = 60_000): Promise<{ code: number; out: string; err: string }> {
  return new Promise((resolve, reject) => {
    execFile("python3", args, { timeout: timeoutMs }, (error, stdout, stderr) => {
      if (error && error.code === undefined) reject(error);
      else resolve({ code: error ? (error.code as number) ?? 1 : 0, out: stdout, err: stderr });
    });
  });
}

async function waitForServer(deadlineMs: number): Promise<void> {
  const start = Date.now();
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/api/panoramas`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() - start > deadlineMs) throw new Error("server did not start");
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "omnizoom-e2e-"));
  const script = `
import sys
import numpy as np
from omnizoom.image import ErpImage, save_png
rng = np.random.default_rng(3)
h, w = 64, 128
i, j = np.mgrid[0:h, 0:w]
img = np.stack([0.5 + 0.4*np.sin(2*np.pi*j/w + c)*np.cos(np.pi*(i+0.5)/h) for c in (0, 2, 4)], -1)
save_png(ErpImage(np.clip(img, 0, 1)), sys.argv[1])
`;
  writeFileSync(join(workDir, "make_pano.py"), script);
  const res = await runPython([join(workDir, "make_pano.py"), join(workDir, "pano.png")]);
  expect(res.code).toBe(0);

  serverProc = spawn("python3", ["-m", "omnizoom.cli", "serve", "--port", String(PORT),
                                 "--panorama-dir", workDir],
                     { stdio: "ignore" });
  await waitForServer(20_000);
}, 60_000);

afterAll(() => {
  serverProc?.kill();
});

describe("viewer against a live server", () => {
  it("identity state displays pixels equal to the CLI identity warp", async () => {
    const state = identityState("pano", 128, 64);
    const resp = await fetch(`${BASE}/api/warp?${buildWarpQuery(state)}`);
    expect(resp.status).toBe(200);
    const bytes = Buffer.from(await resp.arrayBuffer());
    const apiPath = join(workDir, "api.png");
    writeFileSync(apiPath, bytes);

    const cliPath = join(workDir, "cli.png");
    const warp = await runPython(["-m", "omnizoom.cli", "warp",
                                  "--input", join(workDir, "pano.png"),
                                  "--output", cliPath,
                                  "--matrix", "1,0,0,0,0,0,1,0"]);
    expect(warp.code).toBe(0);

    const compareScript = `
import sys
import numpy as np
from omnizoom.image import load_png
a = load_png(sys.argv[1]).samples
b = load_png(sys.argv[2]).samples
sys.exit(0 if np.array_equal(a, b) else 1)
`;
    writeFileSync(join(workDir, "compare.py"), compareScript);
    const cmp = await runPython([join(workDir, "compare.py"), apiPath, cliPath]);
    expect(cmp.code).toBe(0);
  }, 60_000);

  it("restored hash state reproduces the request the server answers", async () => {
    const state = {
      ...identityState("pano", 128, 64),
      yaw: 0.7,
      pitch: 0.12,
      zoomFactor: 2,
      zoomCenter: { theta: 0.7, phi: 0.12 },
    };
    const { toHash, fromHash } = await import("../src/viewstate.js");
    const restored = fromHash(toHash(state))!;
    const q1 = buildWarpQuery(state);
    const q2 = buildWarpQuery(restored);
    expect(q2).toBe(q1);
    const [r1, r2] = await Promise.all([
      fetch(`${BASE}/api/warp?${q1}`),
      fetch(`${BASE}/api/warp?${q2}`),
    ]);
    expect(r1.status).toBe(200);
    const [b1, b2] = await Promise.all([r1.arrayBuffer(), r2.arrayBuffer()]);
    expect(Buffer.from(b1).equals(Buffer.from(b2))).toBe(true);
  }, 60_000);
});
