// Typed client for the session service. Every mutation carries the last
// acknowledged revision in the X-Session-Version header; a 409 surfaces as
// ConflictError so the UI can reload and retry.

import type {
  AnnotationEventDoc, AnnotationsDoc, JobDoc, MeshDoc, ResultsDoc,
  SessionDoc, SkeletonDoc,
} from "./types.js";

export const VERSION_HEADER = "x-session-version";

export class ConflictError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function expectJson<T>(res: Response): Promise<T> {
  if (res.status === 409) {
    throw new ConflictError(await res.text());
  }
  if (!res.ok) {
    throw new ApiError(res.status, await res.text());
  }
  return (await res.json()) as T;
}

export interface AnnotationsResponse {
  annotations: AnnotationsDoc;
  revision: number;
  static: boolean;
  scale: number;
}

export class ApiClient {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listSessions(): Promise<string[]> {
    const body = await expectJson<{ sessions: string[] }>(
      await this.fetchFn(this.url("/sessions")));
    return body.sessions;
  }

  async getSession(id: string): Promise<{
    session: SessionDoc; revision: number; num_frames: number;
  }> {
    return expectJson(await this.fetchFn(this.url(`/sessions/${id}`)));
  }

  async getAnnotations(id: string): Promise<AnnotationsResponse> {
    return expectJson(await this.fetchFn(this.url(`/sessions/${id}/annotations`)));
  }

  async postEvent(id: string, event: AnnotationEventDoc,
                  revision: number): Promise<number> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/annotations`), {
      method: "POST",
      headers: { "content-type": "application/json", [VERSION_HEADER]: String(revision) },
      body: JSON.stringify(event),
    });
    const body = await expectJson<{ revision: number }>(res);
    return body.revision;
  }

  async getMesh(id: string): Promise<MeshDoc> {
    return expectJson(await this.fetchFn(this.url(`/sessions/${id}/mesh`)));
  }

  async getSkeleton(id: string): Promise<SkeletonDoc> {
    return expectJson(await this.fetchFn(this.url(`/sessions/${id}/skeleton`)));
  }

  async solve(id: string): Promise<string> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/solve`),
                                   { method: "POST" });
    const body = await expectJson<{ job_id: string }>(res);
    return body.job_id;
  }

  async getJob(jobId: string): Promise<JobDoc> {
    return expectJson(await this.fetchFn(this.url(`/jobs/${jobId}`)));
  }

  async waitForJob(jobId: string, intervalMs = 250,
                   timeoutMs = 120000): Promise<JobDoc> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done" || job.state === "failed") {
        return job;
      }
      if (Date.now() > deadline) {
        throw new ApiError(0, `job ${jobId} timed out`);
      }
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  async getResults(id: string): Promise<ResultsDoc> {
    return expectJson(await this.fetchFn(this.url(`/sessions/${id}/results`)));
  }

  overlayUrl(id: string, frame: number): string {
    return this.url(`/sessions/${id}/frames/${frame}/overlay`);
  }
}
