// Vertex picking: the click defines a ray through the camera; among vertices
// whose projection falls within a screen-space threshold of the click, take
// the one nearest to the ray. Snapping to mesh vertices keeps annotations
// reproducible (the session schema stores object-local vertex coordinates).

import type { Vec3 } from "./types.js";

export interface PickCamera {
  f: number;   // focal length in pixels (viewer uses square pixels)
  cx: number;
  cy: number;
}

export interface PickResult {
  index: number;
  position: Vec3;      // the vertex in the coordinates it was given
  screenDistance: number;
  rayDistance: number;
}

// `viewVertices` are vertices already transformed into camera space
// (z forward positive); `localVertices` are the untransformed object-local
// coordinates returned on a hit.
export function pickVertex(
  viewVertices: ArrayLike<Vec3>,
  localVertices: ArrayLike<Vec3>,
  camera: PickCamera,
  clickU: number,
  clickV: number,
  thresholdPx = 12,
): PickResult | null {
  // unit ray through the pixel
  const rx = (clickU - camera.cx) / camera.f;
  const ry = (clickV - camera.cy) / camera.f;
  const norm = Math.sqrt(rx * rx + ry * ry + 1.0);
  const d: Vec3 = [rx / norm, ry / norm, 1.0 / norm];

  let best: PickResult | null = null;
  let bestDepth = Infinity;
  for (let i = 0; i < viewVertices.length; i++) {
    const [x, y, z] = viewVertices[i];
    if (z <= 1e-6) {
      continue; // behind the camera
    }
    const u = (camera.f * x) / z + camera.cx;
    const v = (camera.f * y) / z + camera.cy;
    const du = u - clickU;
    const dv = v - clickV;
    const screenDistance = Math.sqrt(du * du + dv * dv);
    if (screenDistance > thresholdPx) {
      continue;
    }
    const along = x * d[0] + y * d[1] + z * d[2];
    const px = x - along * d[0];
    const py = y - along * d[1];
    const pz = z - along * d[2];
    const rayDistance = Math.sqrt(px * px + py * py + pz * pz);
    const closer = best === null || rayDistance < best.rayDistance - 1e-12
      || (Math.abs(rayDistance - best.rayDistance) <= 1e-12 && z < bestDepth);
    if (closer) {
      bestDepth = z;
      best = {
        index: i,
        position: [...localVertices[i]] as Vec3,
        screenDistance,
        rayDistance,
      };
    }
  }
  return best;
}
