// UI session state. The server is the single source of truth for
// annotations: this store only mirrors acknowledged snapshots plus the
// transient selections and staged (unsubmitted) pairs. Staged pairs are
// dropped only by explicit discard.

import type { AnnotationsDoc, PairDoc, TrackDoc, Vec3 } from "./types.js";

export interface VertexSelection {
  index: number;
  position: Vec3; // object-local coordinates
}

export interface PendingPair {
  keypoint: number;
  objectPoint: Vec3;
  start: number;
  end: number;
}

export class UiSessionState {
  revision = 0;
  currentFrame = 0;
  selectedVertex: VertexSelection | null = null;
  selectedKeypoint: number | null = null;
  pendingPairs: PendingPair[] = [];
  pairs: PairDoc[] = [];
  tracks: TrackDoc[] = [];
  isStatic = false;
  scale = 1.0;

  constructor(public sessionId: string, public numFrames: number) {
    if (numFrames < 1) {
      throw new Error("session must have at least one frame");
    }
  }

  applySnapshot(annotations: AnnotationsDoc, revision: number,
                isStatic: boolean, scale: number): void {
    this.pairs = annotations.pairs;
    this.tracks = annotations.tracks;
    this.revision = revision;
    this.isStatic = isStatic;
    this.scale = scale;
  }

  // scrubbing only moves the playhead; annotations are never touched here
  setFrame(frame: number): void {
    this.currentFrame = Math.min(Math.max(frame, 0), this.numFrames - 1);
  }

  stepFrame(delta: number): void {
    this.setFrame(this.currentFrame + delta);
  }

  // null means the pick ray hit nothing: the selection stays as-is
  selectVertex(selection: VertexSelection | null): void {
    if (selection !== null) {
      this.selectedVertex = selection; // single-selection: replaces the last
    }
  }

  selectKeypoint(id: number | null): void {
    this.selectedKeypoint = id;
  }

  get canStagePair(): boolean {
    return this.selectedVertex !== null && this.selectedKeypoint !== null;
  }

  stagePair(start = 0, end?: number): PendingPair | null {
    if (!this.canStagePair) {
      return null;
    }
    const pending: PendingPair = {
      keypoint: this.selectedKeypoint as number,
      objectPoint: [...(this.selectedVertex as VertexSelection).position] as Vec3,
      start,
      end: end ?? this.numFrames,
    };
    this.pendingPairs.push(pending);
    return pending;
  }

  discardPending(index: number): void {
    if (index < 0 || index >= this.pendingPairs.length) {
      throw new Error(`no pending pair at ${index}`);
    }
    this.pendingPairs.splice(index, 1);
  }

  removePendingAfterAck(pending: PendingPair): void {
    const i = this.pendingPairs.indexOf(pending);
    if (i >= 0) {
      this.pendingPairs.splice(i, 1);
    }
  }

  // the 2D annotation panel is disabled for static objects
  get canAnnotate2d(): boolean {
    return !this.isStatic && this.selectedVertex !== null;
  }

  clickInFrame(u: number, v: number, width: number, height: number): boolean {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
}
