// Two-level joint tree for the keypoint picker: the parent parts in their
// served order, each holding its keypoint leaves. Mirrors the skeleton
// definition file exactly; the backend is authoritative.

import type { SkeletonDoc } from "./types.js";

export interface JointTreeLeaf {
  id: number;
  name: string;   // full "group/sub" name
  label: string;  // sub-joint label shown in the tree
}

export interface JointTreeGroup {
  name: string;
  leaves: JointTreeLeaf[];
}

export function buildJointTree(skeleton: SkeletonDoc): JointTreeGroup[] {
  const groups: JointTreeGroup[] = [];
  const byName = new Map<string, JointTreeGroup>();
  for (const kp of skeleton.keypoints) {
    let group = byName.get(kp.group);
    if (!group) {
      group = { name: kp.group, leaves: [] };
      byName.set(kp.group, group);
      groups.push(group);
    }
    const label = kp.name.includes("/")
      ? kp.name.slice(kp.name.indexOf("/") + 1)
      : kp.name;
    group.leaves.push({ id: kp.id, name: kp.name, label });
  }
  const total = groups.reduce((n, g) => n + g.leaves.length, 0);
  if (total !== 74) {
    throw new Error(`joint tree must have 74 leaves, got ${total}`);
  }
  return groups;
}

export function leafCount(groups: JointTreeGroup[]): number {
  return groups.reduce((n, g) => n + g.leaves.length, 0);
}

export function findLeaf(groups: JointTreeGroup[], id: number): JointTreeLeaf | null {
  for (const g of groups) {
    const hit = g.leaves.find((l) => l.id === id);
    if (hit) {
      return hit;
    }
  }
  return null;
}
