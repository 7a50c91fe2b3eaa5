// Scripted UI round-trip against a live backend: drive the same state
// machine and API client the app uses to annotate one contact pair and one
// 2D track point, trigger a solve, and verify the server echoes exactly what
// was posted with one version increment per event.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { buildJointTree, leafCount } from "../src/jointTree.js";
import { pickVertex } from "../src/picking.js";
import { UiSessionState } from "../src/state.js";
import type { Vec3 } from "../src/types.js";

const PORT = 18731;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let dataRoot = "";

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/sessions`);
      if (res.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error("backend did not come up");
    }
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  dataRoot = mkdtempSync(join(tmpdir(), "hoisolver-ui-"));
  const gen = spawnSync("python3", [
    "-c",
    [
      "import sys",
      "from hoisolver.synthetic import build_synthetic_session",
      `build_synthetic_session(r'${join(dataRoot, "demo")}', num_frames=12,`,
      "    seed=5, session_id='demo')",
    ].join("\n"),
  ], { encoding: "utf-8" });
  if (gen.status !== 0) {
    throw new Error(`scene generation failed: ${gen.stderr}`);
  }
  server = spawn("python3", ["-m", "hoisolver.cli", "serve",
                             "--data", dataRoot, "--port", String(PORT)],
                 { stdio: "ignore" });
  await waitForServer();
}, 60000);

afterAll(() => {
  server?.kill();
  if (dataRoot) {
    rmSync(dataRoot, { recursive: true, force: true });
  }
});

describe("annotation round-trip", () => {
  it("annotates a pair and a 2D point, solves, and reads back exactly what "
     + "was posted", async () => {
    const api = new ApiClient(BASE);
    const ids = await api.listSessions();
    expect(ids).toContain("demo");

    const { revision, num_frames } = await api.getSession("demo");
    const state = new UiSessionState("demo", num_frames);
    state.revision = revision;
    const controller = new SessionController(api, state);
    await controller.refresh();
    const rev0 = state.revision;
    const pairs0 = state.pairs.length;

    // the joint tree mirrors the served skeleton and always has 74 leaves
    const skeleton = await api.getSkeleton("demo");
    const tree = buildJointTree(skeleton);
    expect(leafCount(tree)).toBe(74);

    // pick a mesh vertex exactly the way the viewer does: project the
    // vertices and click on one of them
    const mesh = await api.getMesh("demo");
    const cam = { f: 300, cx: 160, cy: 120 };
    const viewVertices = mesh.vertices.map(
      (p) => [p[0], p[1], p[2] + 2.0] as Vec3); // push in front of the camera
    const target = viewVertices[3];
    const clickU = cam.f * target[0] / target[2] + cam.cx;
    const clickV = cam.f * target[1] / target[2] + cam.cy;
    const hit = pickVertex(viewVertices, mesh.vertices, cam, clickU, clickV);
    expect(hit?.index).toBe(3);
    state.selectVertex({ index: hit!.index, position: hit!.position });

    // select a keypoint leaf from the tree and submit the staged pair
    const leaf = tree.find((g) => g.name === "rightHand")!.leaves[1];
    state.selectKeypoint(leaf.id);
    const pending = state.stagePair(0, num_frames)!;
    await controller.submitPair(pending);
    expect(state.revision).toBe(rev0 + 1); // one increment per event
    expect(state.pendingPairs.length).toBe(0);

    const posted = state.pairs[state.pairs.length - 1];
    expect(state.pairs.length).toBe(pairs0 + 1);
    expect(posted.keypoint).toBe(leaf.id);
    expect(posted.object_point).toEqual(hit!.position);
    expect(posted.start).toBe(0);
    expect(posted.end).toBe(num_frames);

    // 2D point: click on the displayed frame with integer pixel coordinates
    state.setFrame(2);
    const ok = await controller.submitTrackPoint(241, 181, 640, 480);
    expect(ok).toBe(true);
    expect(state.revision).toBe(rev0 + 2);
    const manual = state.tracks.find((t) => t.source === "manual")!;
    expect(manual.object_point).toEqual(hit!.position);
    expect(manual.anchors).toEqual([[2, 241, 181]]);
    const row = manual.points.find((p) => p[0] === 2)!;
    expect(row.slice(1)).toEqual([241, 181, 1]);

    // clicks outside the frame bounds are rejected client-side
    const rejected = await controller.submitTrackPoint(900, 10, 640, 480);
    expect(rejected).toBe(false);
    expect(state.revision).toBe(rev0 + 2);

    // server state equals UI state after the same event sequence
    const fresh = await api.getAnnotations("demo");
    expect(fresh.revision).toBe(state.revision);
    expect(fresh.annotations.pairs).toEqual(state.pairs);
    expect(fresh.annotations.tracks).toEqual(state.tracks);

    // solve and fetch the result
    const jobId = await controller.triggerSolve();
    const job = await api.waitForJob(jobId, 250, 180000);
    expect(job.state).toBe("done");
    const results = await api.getResults("demo");
    expect(results.motion.frames.length).toBe(num_frames);

    // the session annotations backing the solve still match what was posted
    const after = await api.getAnnotations("demo");
    const lastPair = after.annotations.pairs[after.annotations.pairs.length - 1];
    expect(lastPair.keypoint).toBe(leaf.id);
    expect(lastPair.object_point).toEqual(hit!.position);
    const lastTrack = after.annotations.tracks.find((t) => t.source === "manual")!;
    expect(lastTrack.anchors).toEqual([[2, 241, 181]]);
  }, 240000);

  it("reports a conflict for a stale version and recovers by reloading",
     async () => {
    const api = new ApiClient(BASE);
    const { revision, num_frames } = await api.getSession("demo");
    const state = new UiSessionState("demo", num_frames);
    state.revision = revision;
    let prompted = 0;
    const controller = new SessionController(api, state, async () => {
      prompted += 1;
      return true; // retry after reload
    });
    await controller.refresh();

    // another client advances the server version behind our back
    await api.postEvent("demo", { kind: "set-scale", frame: 0,
                                  payload: { scale: 1.25 } }, state.revision);

    state.selectVertex({ index: 0, position: [0.06, 0.06, 0.06] });
    state.selectKeypoint(10);
    const pending = state.stagePair()!;
    await controller.submitPair(pending); // first post conflicts, then retries
    expect(prompted).toBe(1);
    const fresh = await api.getAnnotations("demo");
    expect(fresh.annotations.pairs.map((p) => p.keypoint)).toContain(10);
    expect(fresh.scale).toBe(1.25);
  }, 60000);
});
