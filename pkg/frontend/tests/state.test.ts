import { describe, expect, it } from "vitest";

import { UiSessionState } from "../src/state.js";
import type { AnnotationsDoc } from "../src/types.js";

const emptyAnnotations: AnnotationsDoc = { pairs: [], tracks: [], events: [] };

function makeState(frames = 10): UiSessionState {
  return new UiSessionState("demo", frames);
}

describe("frame scrubbing", () => {
  it("clamps to the valid range and never touches annotations", () => {
    const s = makeState(5);
    s.applySnapshot({
      pairs: [{ keypoint: 1, object_point: [0, 0, 0], start: 0, end: 5 }],
      tracks: [],
      events: [],
    }, 3, false, 1.0);
    const before = JSON.stringify(s.pairs);
    s.setFrame(99);
    expect(s.currentFrame).toBe(4);
    s.setFrame(-3);
    expect(s.currentFrame).toBe(0);
    s.stepFrame(2);
    expect(s.currentFrame).toBe(2);
    expect(JSON.stringify(s.pairs)).toBe(before);
    expect(s.revision).toBe(3);
  });
});

describe("selections", () => {
  it("keeps the current selection on a no-hit pick", () => {
    const s = makeState();
    s.selectVertex({ index: 4, position: [0.1, 0.2, 0.3] });
    s.selectVertex(null);
    expect(s.selectedVertex?.index).toBe(4);
  });

  it("replaces the previous selection on a second click", () => {
    const s = makeState();
    s.selectVertex({ index: 4, position: [0.1, 0.2, 0.3] });
    s.selectVertex({ index: 9, position: [0, 0, 0] });
    expect(s.selectedVertex?.index).toBe(9);
  });

  it("cannot stage a pair until both selections exist", () => {
    const s = makeState();
    expect(s.canStagePair).toBe(false);
    expect(s.stagePair()).toBeNull();
    s.selectVertex({ index: 0, position: [1, 2, 3] });
    expect(s.canStagePair).toBe(false);
    s.selectKeypoint(12);
    expect(s.canStagePair).toBe(true);
    const pending = s.stagePair();
    expect(pending).not.toBeNull();
    expect(pending?.keypoint).toBe(12);
    expect(pending?.objectPoint).toEqual([1, 2, 3]);
    expect(pending?.end).toBe(10);
  });
});

describe("pending pairs", () => {
  it("drops staged pairs only on explicit discard", () => {
    const s = makeState();
    s.selectVertex({ index: 0, position: [0, 0, 0] });
    s.selectKeypoint(3);
    s.stagePair();
    s.applySnapshot(emptyAnnotations, 7, false, 1.0); // snapshot refresh
    expect(s.pendingPairs.length).toBe(1);
    s.discardPending(0);
    expect(s.pendingPairs.length).toBe(0);
    expect(() => s.discardPending(0)).toThrow();
  });
});

describe("2D annotation gating", () => {
  it("is disabled for static objects and without a 3D selection", () => {
    const s = makeState();
    expect(s.canAnnotate2d).toBe(false);
    s.selectVertex({ index: 1, position: [0, 0, 0] });
    expect(s.canAnnotate2d).toBe(true);
    s.applySnapshot(emptyAnnotations, 1, true, 1.0);
    expect(s.canAnnotate2d).toBe(false);
  });

  it("rejects clicks outside the frame bounds", () => {
    const s = makeState();
    expect(s.clickInFrame(10, 10, 640, 480)).toBe(true);
    expect(s.clickInFrame(-1, 10, 640, 480)).toBe(false);
    expect(s.clickInFrame(10, 480, 640, 480)).toBe(false);
    expect(s.clickInFrame(640, 0, 640, 480)).toBe(false);
  });
});
