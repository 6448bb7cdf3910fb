import { describe, expect, it } from "vitest";

import { MaskLayer } from "../src/masklayer.js";
import { decodeMaskPng } from "../src/maskpng.js";

describe("strokes", () => {
  it("flood fill on a fresh layer paints everything", async () => {
    const layer = new MaskLayer(10, 8, 3);
    layer.apply({ kind: "fill", classIndex: 2, x: 4, y: 4 });
    expect(layer.snapshot().every((v) => v === 2)).toBe(true);
    const result = layer.exportPng();
    if (!result.ok) throw new Error(result.reason);
    const decoded = await decodeMaskPng(result.png);
    expect(decoded.data.every((v) => v === 2)).toBe(true);
  });

  it("flood fill stays inside the clicked region", () => {
    const layer = new MaskLayer(9, 9, 3);
    // wall of class 1 splits the raster
    layer.apply({ kind: "brush", classIndex: 1, points: [[4, 0], [4, 8]], radius: 0.5 });
    layer.apply({ kind: "fill", classIndex: 2, x: 0, y: 0 });
    expect(layer.valueAt(0, 0)).toBe(2);
    expect(layer.valueAt(4, 4)).toBe(1);
    expect(layer.valueAt(8, 8)).toBe(0);
  });

  it("brush paints a disk and the eraser restores background", () => {
    const layer = new MaskLayer(16, 16, 2);
    layer.apply({ kind: "brush", classIndex: 1, points: [[8, 8]], radius: 3 });
    expect(layer.valueAt(8, 8)).toBe(1);
    expect(layer.valueAt(8, 5)).toBe(1);
    expect(layer.valueAt(0, 0)).toBe(0);
    layer.apply({ kind: "brush", classIndex: 0, points: [[8, 8]], radius: 3 });
    expect(layer.snapshot().every((v) => v === 0)).toBe(true);
  });

  it("polygon fills its interior by the even-odd rule", () => {
    const layer = new MaskLayer(12, 12, 2);
    layer.apply({
      kind: "polygon",
      classIndex: 2,
      vertices: [
        [1, 1],
        [10, 1],
        [10, 10],
        [1, 10],
      ],
    });
    expect(layer.valueAt(5, 5)).toBe(2);
    expect(layer.valueAt(0, 0)).toBe(0);
    expect(layer.valueAt(11, 11)).toBe(0);
  });

  it("rejects fabricated class values", () => {
    const layer = new MaskLayer(4, 4, 2);
    expect(() => layer.apply({ kind: "fill", classIndex: 255, x: 0, y: 0 })).toThrow();
    expect(() => layer.apply({ kind: "fill", classIndex: 3, x: 0, y: 0 })).toThrow();
    expect(() => layer.apply({ kind: "fill", classIndex: -1, x: 0, y: 0 })).toThrow();
  });
});

describe("undo/redo", () => {
  it("undo restores the exact pre-stroke buffer", () => {
    const layer = new MaskLayer(8, 8, 3);
    layer.apply({ kind: "fill", classIndex: 1, x: 0, y: 0 });
    const before = layer.snapshot();
    layer.apply({ kind: "brush", classIndex: 2, points: [[3, 3]], radius: 2 });
    expect(layer.snapshot()).not.toEqual(before);
    layer.undo();
    expect(layer.snapshot()).toEqual(before);
  });

  it("redo reapplies the undone stroke exactly", () => {
    const layer = new MaskLayer(8, 8, 3);
    layer.apply({ kind: "brush", classIndex: 2, points: [[3, 3]], radius: 2 });
    const after = layer.snapshot();
    layer.undo();
    layer.redo();
    expect(layer.snapshot()).toEqual(after);
  });

  it("a new stroke clears the redo stack", () => {
    const layer = new MaskLayer(8, 8, 3);
    layer.apply({ kind: "fill", classIndex: 1, x: 0, y: 0 });
    layer.undo();
    layer.apply({ kind: "fill", classIndex: 2, x: 0, y: 0 });
    expect(layer.canRedo).toBe(false);
    expect(layer.valueAt(0, 0)).toBe(2);
  });

  it("undo beyond the base is a no-op", () => {
    const layer = new MaskLayer(4, 4, 2);
    layer.undo();
    expect(layer.snapshot().every((v) => v === 0)).toBe(true);
  });

  it("preloaded annotations are the undo base", () => {
    const initial = new Uint8Array(16).fill(1);
    const layer = new MaskLayer(4, 4, 2, initial);
    layer.apply({ kind: "fill", classIndex: 2, x: 0, y: 0 });
    layer.undo();
    expect(layer.snapshot()).toEqual(initial);
  });
});

describe("export", () => {
  it("exports at native resolution", async () => {
    const layer = new MaskLayer(31, 17, 2);
    const result = layer.exportPng();
    if (!result.ok) throw new Error(result.reason);
    const decoded = await decodeMaskPng(result.png);
    expect(decoded.width).toBe(31);
    expect(decoded.height).toBe(17);
  });

  it("blocks export when the buffer violates upload preconditions", () => {
    const poisoned = new Uint8Array(16);
    poisoned[3] = 255;
    const result = new MaskLayer(4, 4, 2, poisoned).exportPng();
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.reason).toContain("255");

    const outOfTable = new Uint8Array(16).fill(9);
    const result2 = new MaskLayer(4, 4, 2, outOfTable).exportPng();
    expect(result2.ok).toBe(false);
  });
});
