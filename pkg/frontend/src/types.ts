// Wire types mirroring the session service documents.

export interface CameraInfo {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface PairDoc {
  keypoint: number;
  object_point: [number, number, number];
  start: number;
  end: number;
}

export interface TrackDoc {
  object_point: [number, number, number];
  points: Array<[number, number, number, number]>; // frame, u, v, valid
  source?: string;
  anchors?: Array<[number, number, number]>;
}

export interface AnnotationEventDoc {
  kind: string;
  frame: number;
  payload: Record<string, unknown>;
  timestamp?: number;
}

export interface AnnotationsDoc {
  pairs: PairDoc[];
  tracks: TrackDoc[];
  events: AnnotationEventDoc[];
}

export interface SessionDoc {
  version: number;
  id: string;
  revision: number;
  camera: CameraInfo;
  fps: number;
  object: { mesh_path: string; scale: number; static: boolean };
  skeleton_path: string | null;
  human_poses_path: string;
  masks_dir: string | null;
  frames_dir: string | null;
  annotations: AnnotationsDoc;
}

export interface SkeletonJointDoc {
  name: string;
  parent: number | null;
  offset: [number, number, number];
}

export interface SkeletonKeypointDoc {
  id: number;
  name: string;
  group: string;
  joint: number;
  offset: [number, number, number];
}

export interface SkeletonDoc {
  version: number;
  joints: SkeletonJointDoc[];
  keypoints: SkeletonKeypointDoc[];
  capsules: Array<{ joint_a: number; joint_b: number; radius: number }>;
}

export interface MeshDoc {
  vertices: Array<[number, number, number]>;
  faces: Array<[number, number, number]>;
  scale: number;
}

export interface JobDoc {
  job_id: string;
  state: "queued" | "running" | "done" | "failed";
  error: string | null;
}

export interface ResultsDoc {
  motion: { version: number; fps: number; frames: Array<Record<string, unknown>> };
  report: Record<string, unknown>;
}

export type Vec3 = [number, number, number];
