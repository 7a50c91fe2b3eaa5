// Annotation app wiring: session picker, frame scrubber with overlay,
// 3D vertex picker, joint tree, pair management, 2D track clicks, static and
// scale flags, solve trigger.

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { buildJointTree, JointTreeGroup } from "./jointTree.js";
import { UiSessionState } from "./state.js";
import { MeshViewer } from "./viewer.js";
import type { SkeletonDoc } from "./types.js";

const api = new ApiClient("");
let state: UiSessionState | null = null;
let controller: SessionController | null = null;
let viewer: MeshViewer | null = null;
let tree: JointTreeGroup[] = [];
let skeleton: SkeletonDoc | null = null;
let playTimer: number | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function confirmConflict(message: string): Promise<boolean> {
  return window.confirm(message);
}

async function loadSessionList(): Promise<void> {
  const ids = await api.listSessions();
  const select = el<HTMLSelectElement>("session-select");
  select.innerHTML = "";
  for (const id of ids) {
    const opt = document.createElement("option");
    opt.value = id;
    opt.textContent = id;
    select.appendChild(opt);
  }
  if (ids.length) {
    await openSession(ids[0]);
  }
}

async function openSession(id: string): Promise<void> {
  const { revision, num_frames } = await api.getSession(id);
  state = new UiSessionState(id, num_frames);
  state.revision = revision;
  controller = new SessionController(api, state, confirmConflict);
  await controller.refresh();

  skeleton = await api.getSkeleton(id);
  tree = buildJointTree(skeleton);
  renderJointTree();

  const mesh = await api.getMesh(id);
  viewer = new MeshViewer(el<HTMLCanvasElement>("mesh-canvas"), (index, position) => {
    state?.selectVertex({ index, position });
    viewer?.setHighlight(position);
    renderSelections();
  });
  viewer.setMesh(mesh);

  const slider = el<HTMLInputElement>("frame-slider");
  slider.max = String(state.numFrames - 1);
  slider.value = "0";
  state.setFrame(0);
  renderAll();
}

function renderAll(): void {
  renderFrame();
  renderPairs();
  renderSelections();
  renderFlags();
}

function renderFrame(): void {
  if (!state) {
    return;
  }
  el<HTMLSpanElement>("frame-label").textContent =
    `${state.currentFrame + 1} / ${state.numFrames}`;
  const img = el<HTMLImageElement>("frame-view");
  img.src = api.overlayUrl(state.sessionId, state.currentFrame) + `?r=${state.revision}`;
}

function renderJointTree(): void {
  const root = el<HTMLDivElement>("joint-tree");
  root.innerHTML = "";
  for (const group of tree) {
    const details = document.createElement("details");
    const summary = document.createElement("summary");
    summary.textContent = group.name;
    details.appendChild(summary);
    for (const leaf of group.leaves) {
      const btn = document.createElement("button");
      btn.className = "leaf";
      btn.textContent = leaf.label;
      btn.dataset.keypoint = String(leaf.id);
      btn.addEventListener("click", () => {
        state?.selectKeypoint(leaf.id);
        renderSelections();
      });
      details.appendChild(btn);
    }
    root.appendChild(details);
  }
}

function renderSelections(): void {
  if (!state) {
    return;
  }
  const vertex = state.selectedVertex;
  el<HTMLSpanElement>("selected-vertex").textContent = vertex
    ? `#${vertex.index} [${vertex.position.map((x) => x.toFixed(4)).join(", ")}]`
    : "none";
  const kp = state.selectedKeypoint;
  el<HTMLSpanElement>("selected-keypoint").textContent =
    kp !== null && skeleton ? skeleton.keypoints[kp].name : "none";
  for (const btn of document.querySelectorAll<HTMLButtonElement>(".leaf")) {
    btn.classList.toggle("active", Number(btn.dataset.keypoint) === kp);
  }
  el<HTMLButtonElement>("stage-pair").disabled = !state.canStagePair;
  el<HTMLDivElement>("track-panel").classList.toggle("disabled",
                                                     !state.canAnnotate2d);
  renderPending();
}

function renderPending(): void {
  if (!state) {
    return;
  }
  const list = el<HTMLUListElement>("pending-list");
  list.innerHTML = "";
  state.pendingPairs.forEach((pending, i) => {
    const li = document.createElement("li");
    li.textContent = `kp ${pending.keypoint} @ [${pending.objectPoint
      .map((x) => x.toFixed(3)).join(", ")}] frames ${pending.start}-${pending.end}`;
    const submit = document.createElement("button");
    submit.textContent = "submit";
    submit.addEventListener("click", async () => {
      await controller?.submitPair(pending);
      renderAll();
    });
    const discard = document.createElement("button");
    discard.textContent = "discard";
    discard.addEventListener("click", () => {
      state?.discardPending(i);
      renderPending();
    });
    li.append(" ", submit, " ", discard);
    list.appendChild(li);
  });
}

function renderPairs(): void {
  if (!state || !skeleton) {
    return;
  }
  const list = el<HTMLUListElement>("pair-list");
  list.innerHTML = "";
  state.pairs.forEach((pair, i) => {
    const li = document.createElement("li");
    const name = skeleton!.keypoints[pair.keypoint]?.name ?? `kp ${pair.keypoint}`;
    li.textContent = `${name} <-> [${pair.object_point
      .map((x) => x.toFixed(3)).join(", ")}] frames ${pair.start}-${pair.end}`;
    const del = document.createElement("button");
    del.textContent = "delete";
    del.addEventListener("click", async () => {
      await controller?.removePair(i);
      renderAll();
    });
    li.append(" ", del);
    list.appendChild(li);
  });
  el<HTMLSpanElement>("revision-label").textContent = String(state.revision);
}

function renderFlags(): void {
  if (!state) {
    return;
  }
  el<HTMLInputElement>("static-flag").checked = state.isStatic;
  el<HTMLInputElement>("scale-input").value = state.scale.toFixed(3);
}

function bindControls(): void {
  el<HTMLSelectElement>("session-select").addEventListener("change", (e) => {
    void openSession((e.target as HTMLSelectElement).value);
  });
  const slider = el<HTMLInputElement>("frame-slider");
  slider.addEventListener("input", () => {
    state?.setFrame(Number(slider.value));
    renderFrame();
  });
  // keyboard: arrows step frames, space toggles playback
  window.addEventListener("keydown", (e) => {
    if (!state || (e.target as HTMLElement).tagName === "INPUT") {
      return;
    }
    if (e.key === "ArrowRight") {
      state.stepFrame(1);
    } else if (e.key === "ArrowLeft") {
      state.stepFrame(-1);
    } else if (e.key === " ") {
      e.preventDefault();
      togglePlayback();
      return;
    } else {
      return;
    }
    slider.value = String(state.currentFrame);
    renderFrame();
  });
  el<HTMLButtonElement>("stage-pair").addEventListener("click", () => {
    state?.stagePair();
    renderPending();
  });
  el<HTMLImageElement>("frame-view").addEventListener("click", async (e) => {
    if (!state || !controller) {
      return;
    }
    const img = e.target as HTMLImageElement;
    const rect = img.getBoundingClientRect();
    const u = ((e.clientX - rect.left) / rect.width) * img.naturalWidth;
    const v = ((e.clientY - rect.top) / rect.height) * img.naturalHeight;
    const ok = await controller.submitTrackPoint(u, v, img.naturalWidth,
                                                 img.naturalHeight);
    if (ok) {
      renderAll();
    }
  });
  el<HTMLInputElement>("static-flag").addEventListener("change", async (e) => {
    await controller?.setStatic((e.target as HTMLInputElement).checked);
    renderAll();
  });
  el<HTMLInputElement>("scale-input").addEventListener("change", async (e) => {
    const scale = Number((e.target as HTMLInputElement).value);
    if (scale > 0) {
      await controller?.setScale(scale);
      renderAll();
    }
  });
  el<HTMLButtonElement>("solve-button").addEventListener("click", async () => {
    if (!controller || !state) {
      return;
    }
    const status = el<HTMLSpanElement>("job-status");
    status.textContent = "queued";
    const jobId = await controller.triggerSolve();
    const job = await api.waitForJob(jobId);
    status.textContent = job.state + (job.error ? `: ${job.error}` : "");
    renderFrame(); // overlays now reflect the solved poses
  });
}

function togglePlayback(): void {
  if (playTimer !== null) {
    window.clearInterval(playTimer);
    playTimer = null;
    return;
  }
  playTimer = window.setInterval(() => {
    if (!state) {
      return;
    }
    state.setFrame((state.currentFrame + 1) % state.numFrames);
    el<HTMLInputElement>("frame-slider").value = String(state.currentFrame);
    renderFrame();
  }, 120);
}

window.addEventListener("DOMContentLoaded", () => {
  bindControls();
  void loadSessionList();
});
