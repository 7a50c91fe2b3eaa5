// three.js mesh viewer with vertex snapping. Orbit by dragging, zoom with
// the wheel; clicks report the picked vertex through the callback.

import * as THREE from "three";
import { pickVertex } from "./picking.js";
import type { MeshDoc, Vec3 } from "./types.js";

export class MeshViewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private localVertices: Vec3[] = [];
  private highlight: THREE.Mesh | null = null;
  private orbit = { theta: 0.6, phi: 0.9, radius: 1.2, target: new THREE.Vector3() };
  private dragging = false;
  private moved = 0;

  constructor(
    private canvas: HTMLCanvasElement,
    private onPick: (index: number, position: Vec3) => void,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(
      45, canvas.clientWidth / Math.max(canvas.clientHeight, 1), 0.001, 100);
    this.scene.background = new THREE.Color(0x1c1f26);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.6));
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(1, 2, 1.5);
    this.scene.add(key);
    this.bindInput();
  }

  setMesh(mesh: MeshDoc): void {
    this.localVertices = mesh.vertices;
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.Float32BufferAttribute(
      mesh.vertices.flat(), 3));
    geometry.setIndex(mesh.faces.flat());
    geometry.computeVertexNormals();
    geometry.computeBoundingSphere();
    const material = new THREE.MeshStandardMaterial({
      color: 0x6f9fd8, roughness: 0.8, flatShading: true,
    });
    const obj = new THREE.Mesh(geometry, material);
    obj.name = "object";
    const old = this.scene.getObjectByName("object");
    if (old) {
      this.scene.remove(old);
    }
    this.scene.add(obj);
    const points = new THREE.Points(geometry, new THREE.PointsMaterial({
      color: 0xd8e6f5, size: 0.004,
    }));
    points.name = "vertices";
    const oldPts = this.scene.getObjectByName("vertices");
    if (oldPts) {
      this.scene.remove(oldPts);
    }
    this.scene.add(points);
    const sphere = geometry.boundingSphere;
    if (sphere) {
      this.orbit.target.copy(sphere.center);
      this.orbit.radius = Math.max(sphere.radius * 3.0, 0.05);
    }
    this.render();
  }

  setHighlight(position: Vec3 | null): void {
    if (this.highlight) {
      this.scene.remove(this.highlight);
      this.highlight = null;
    }
    if (position) {
      const r = this.orbit.radius * 0.015;
      this.highlight = new THREE.Mesh(
        new THREE.SphereGeometry(r, 12, 12),
        new THREE.MeshBasicMaterial({ color: 0xffb347 }));
      this.highlight.position.set(...position);
      this.scene.add(this.highlight);
    }
    this.render();
  }

  private cameraPose(): void {
    const { theta, phi, radius, target } = this.orbit;
    this.camera.position.set(
      target.x + radius * Math.sin(phi) * Math.cos(theta),
      target.y + radius * Math.cos(phi),
      target.z + radius * Math.sin(phi) * Math.sin(theta));
    this.camera.lookAt(target);
    this.camera.updateMatrixWorld();
  }

  render(): void {
    const w = this.canvas.clientWidth || this.canvas.width;
    const h = this.canvas.clientHeight || this.canvas.height;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / Math.max(h, 1);
    this.camera.updateProjectionMatrix();
    this.cameraPose();
    this.renderer.render(this.scene, this.camera);
  }

  private bindInput(): void {
    this.canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.moved = 0;
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) {
        return;
      }
      this.moved += Math.abs(e.movementX) + Math.abs(e.movementY);
      this.orbit.theta += e.movementX * 0.008;
      this.orbit.phi = Math.min(Math.max(this.orbit.phi - e.movementY * 0.008,
                                         0.05), Math.PI - 0.05);
      this.render();
    });
    this.canvas.addEventListener("pointerup", (e) => {
      this.dragging = false;
      if (this.moved < 4) {
        this.handleClick(e);
      }
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.orbit.radius *= e.deltaY > 0 ? 1.1 : 0.9;
      this.render();
    }, { passive: false });
  }

  private handleClick(e: PointerEvent): void {
    if (this.localVertices.length === 0) {
      return;
    }
    const rect = this.canvas.getBoundingClientRect();
    const u = e.clientX - rect.left;
    const v = e.clientY - rect.top;
    this.cameraPose();
    const view = new THREE.Vector3();
    const viewVertices: Vec3[] = this.localVertices.map((p) => {
      view.set(p[0], p[1], p[2]).applyMatrix4(this.camera.matrixWorldInverse);
      return [view.x, view.y, -view.z]; // camera looks down -z in three
    });
    const h = rect.height;
    const fovRad = (this.camera.fov * Math.PI) / 180;
    const f = h / (2 * Math.tan(fovRad / 2));
    const hit = pickVertex(viewVertices, this.localVertices,
                           { f, cx: rect.width / 2, cy: h / 2 },
                           u, h - v, 14);
    if (hit) {
      this.onPick(hit.index, hit.position);
    }
    // no hit: the selection stays as-is
  }
}
