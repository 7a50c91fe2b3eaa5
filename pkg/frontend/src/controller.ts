// Submission flows. Every mutation posts one annotation event with the last
// acknowledged revision and refreshes the snapshot from the server response;
// on a version conflict the UI reloads the server state and asks the user
// whether to retry.

import { ApiClient, ConflictError } from "./api.js";
import type { PendingPair, UiSessionState } from "./state.js";

export interface ConflictPrompt {
  // return true to retry the event against the reloaded state
  (message: string): Promise<boolean>;
}

export class SessionController {
  constructor(
    private api: ApiClient,
    private state: UiSessionState,
    private onConflict: ConflictPrompt = async () => true,
  ) {}

  async refresh(): Promise<void> {
    const res = await this.api.getAnnotations(this.state.sessionId);
    this.state.applySnapshot(res.annotations, res.revision, res.static, res.scale);
  }

  private async postWithRetry(event: {
    kind: string; frame: number; payload: Record<string, unknown>;
  }): Promise<void> {
    for (;;) {
      try {
        await this.api.postEvent(this.state.sessionId, event, this.state.revision);
        await this.refresh();
        return;
      } catch (err) {
        if (err instanceof ConflictError) {
          await this.refresh(); // reload, then ask
          const retry = await this.onConflict(
            "the session changed on the server; retry this edit?");
          if (retry) {
            continue;
          }
          return;
        }
        throw err;
      }
    }
  }

  async submitPair(pending: PendingPair): Promise<void> {
    await this.postWithRetry({
      kind: "add-pair",
      frame: pending.start,
      payload: {
        keypoint: pending.keypoint,
        object_point: pending.objectPoint,
        start: pending.start,
        end: pending.end,
      },
    });
    this.state.removePendingAfterAck(pending);
  }

  async removePair(index: number): Promise<void> {
    await this.postWithRetry({ kind: "remove-pair", frame: 0,
                               payload: { index } });
  }

  // click coordinates are integer pixels on the displayed frame
  async submitTrackPoint(u: number, v: number, width: number,
                         height: number): Promise<boolean> {
    if (!this.state.canAnnotate2d) {
      return false;
    }
    if (!this.state.clickInFrame(u, v, width, height)) {
      return false; // rejected client-side
    }
    const vertex = this.state.selectedVertex;
    if (vertex === null) {
      return false;
    }
    await this.postWithRetry({
      kind: "add-track-point",
      frame: this.state.currentFrame,
      payload: {
        object_point: vertex.position,
        u: Math.round(u),
        v: Math.round(v),
      },
    });
    return true;
  }

  async setStatic(isStatic: boolean): Promise<void> {
    await this.postWithRetry({ kind: "set-static", frame: 0,
                               payload: { static: isStatic } });
  }

  async setScale(scale: number): Promise<void> {
    await this.postWithRetry({ kind: "set-scale", frame: 0,
                               payload: { scale } });
  }

  async triggerSolve(): Promise<string> {
    return this.api.solve(this.state.sessionId);
  }
}
