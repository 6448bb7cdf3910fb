// Editable class-index buffer behind the mask editor.
//
// Tools append stroke operations; undo rebuilds the buffer from the base
// state and replays the remaining strokes, so undo/redo restore exact
// buffers. Only class indices the user selected (or 0 for the eraser) can
// ever reach the buffer — 255 and out-of-table values are rejected at the
// stroke level and re-checked at export.

import { encodeMaskPng } from "./maskpng.js";
import type { MaskBuffer } from "./types.js";

export const IGNORE = 255;

export type Stroke =
  | { kind: "brush"; classIndex: number; points: Array<[number, number]>; radius: number }
  | { kind: "polygon"; classIndex: number; vertices: Array<[number, number]> }
  | { kind: "fill"; classIndex: number; x: number; y: number };

export type ExportResult =
  | { ok: true; png: Uint8Array }
  | { ok: false; reason: string };

export class MaskLayer {
  readonly width: number;
  readonly height: number;
  readonly nClasses: number;
  private readonly base: Uint8Array;
  private buffer: Uint8Array;
  private undoStack: Stroke[] = [];
  private redoStack: Stroke[] = [];

  constructor(width: number, height: number, nClasses: number, initial?: Uint8Array) {
    if (width < 1 || height < 1) throw new Error("mask dimensions must be positive");
    if (nClasses < 1 || nClasses > 254) throw new Error("class count must be in 1..254");
    if (initial && initial.length !== width * height) {
      throw new Error("initial buffer does not match dimensions");
    }
    this.width = width;
    this.height = height;
    this.nClasses = nClasses;
    this.base = initial ? initial.slice() : new Uint8Array(width * height);
    this.buffer = this.base.slice();
  }

  snapshot(): Uint8Array {
    return this.buffer.slice();
  }

  valueAt(x: number, y: number): number {
    return this.buffer[y * this.width + x];
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  apply(stroke: Stroke): void {
    this.checkClass(stroke.classIndex);
    this.paint(stroke);
    this.undoStack.push(stroke);
    this.redoStack = [];
  }

  undo(): void {
    const stroke = this.undoStack.pop();
    if (!stroke) return;
    this.redoStack.push(stroke);
    this.buffer = this.base.slice();
    for (const s of this.undoStack) this.paint(s);
  }

  redo(): void {
    const stroke = this.redoStack.pop();
    if (!stroke) return;
    this.paint(stroke);
    this.undoStack.push(stroke);
  }

  exportPng(): ExportResult {
    for (let i = 0; i < this.buffer.length; i++) {
      const v = this.buffer[i];
      if (v === IGNORE) {
        return { ok: false, reason: `pixel ${i} carries the reserved ignore value 255` };
      }
      if (v > this.nClasses) {
        return { ok: false, reason: `pixel ${i} has class ${v}, table only has ${this.nClasses}` };
      }
    }
    const mask: MaskBuffer = { width: this.width, height: this.height, data: this.buffer };
    return { ok: true, png: encodeMaskPng(mask) };
  }

  private checkClass(classIndex: number): void {
    if (!Number.isInteger(classIndex) || classIndex < 0 || classIndex > this.nClasses) {
      throw new Error(`class index ${classIndex} outside 0..${this.nClasses}`);
    }
  }

  private paint(stroke: Stroke): void {
    switch (stroke.kind) {
      case "brush":
        this.paintBrush(stroke.points, stroke.radius, stroke.classIndex);
        break;
      case "polygon":
        this.paintPolygon(stroke.vertices, stroke.classIndex);
        break;
      case "fill":
        this.floodFill(stroke.x, stroke.y, stroke.classIndex);
        break;
    }
  }

  private stampDisk(cx: number, cy: number, radius: number, value: number): void {
    const r2 = radius * radius;
    const x0 = Math.max(0, Math.floor(cx - radius));
    const x1 = Math.min(this.width - 1, Math.ceil(cx + radius));
    const y0 = Math.max(0, Math.floor(cy - radius));
    const y1 = Math.min(this.height - 1, Math.ceil(cy + radius));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r2) this.buffer[y * this.width + x] = value;
      }
    }
  }

  private paintBrush(points: Array<[number, number]>, radius: number, value: number): void {
    if (points.length === 0) return;
    this.stampDisk(points[0][0], points[0][1], radius, value);
    for (let i = 1; i < points.length; i++) {
      const [ax, ay] = points[i - 1];
      const [bx, by] = points[i];
      const steps = Math.max(1, Math.ceil(Math.hypot(bx - ax, by - ay)));
      for (let s = 1; s <= steps; s++) {
        const t = s / steps;
        this.stampDisk(ax + (bx - ax) * t, ay + (by - ay) * t, radius, value);
      }
    }
  }

  private paintPolygon(vertices: Array<[number, number]>, value: number): void {
    if (vertices.length < 3) return;
    let minX = Infinity;
    let maxX = -Infinity;
    let minY = Infinity;
    let maxY = -Infinity;
    for (const [x, y] of vertices) {
      minX = Math.min(minX, x);
      maxX = Math.max(maxX, x);
      minY = Math.min(minY, y);
      maxY = Math.max(maxY, y);
    }
    const x0 = Math.max(0, Math.floor(minX));
    const x1 = Math.min(this.width - 1, Math.ceil(maxX));
    const y0 = Math.max(0, Math.floor(minY));
    const y1 = Math.min(this.height - 1, Math.ceil(maxY));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        // even-odd rule at the pixel center
        const px = x + 0.5;
        const py = y + 0.5;
        let inside = false;
        for (let i = 0, j = vertices.length - 1; i < vertices.length; j = i++) {
          const [xi, yi] = vertices[i];
          const [xj, yj] = vertices[j];
          if (yi > py !== yj > py && px < ((xj - xi) * (py - yi)) / (yj - yi) + xi) {
            inside = !inside;
          }
        }
        if (inside) this.buffer[y * this.width + x] = value;
      }
    }
  }

  private floodFill(startX: number, startY: number, value: number): void {
    const x = Math.floor(startX);
    const y = Math.floor(startY);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const target = this.buffer[y * this.width + x];
    if (target === value) return;
    const stack: number[] = [y * this.width + x];
    while (stack.length > 0) {
      const idx = stack.pop()!;
      if (this.buffer[idx] !== target) continue;
      this.buffer[idx] = value;
      const cx = idx % this.width;
      if (cx > 0) stack.push(idx - 1);
      if (cx < this.width - 1) stack.push(idx + 1);
      if (idx >= this.width) stack.push(idx - this.width);
      if (idx < this.buffer.length - this.width) stack.push(idx + this.width);
    }
  }
}
