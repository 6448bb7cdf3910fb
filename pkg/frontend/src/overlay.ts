// Mask-over-image compositing for the propagation review panels.

import type { LegendEntry, MaskBuffer } from "./types.js";

const IGNORE = 255;

// RGBA pixels: background transparent, classes in legend colors, ignore in
// translucent gray. Opacity in [0,1] scales the class alpha.
export function renderOverlay(mask: MaskBuffer, legend: LegendEntry[], opacity: number) {
  const colorByIndex = new Map(legend.map((e) => [e.index, e.color]));
  const alpha = Math.round(Math.max(0, Math.min(1, opacity)) * 255);
  const out = new Uint8ClampedArray(new ArrayBuffer(mask.width * mask.height * 4));
  for (let i = 0; i < mask.data.length; i++) {
    const value = mask.data[i];
    if (value === 0) continue; // transparent background
    const offset = i * 4;
    if (value === IGNORE) {
      out[offset] = out[offset + 1] = out[offset + 2] = 128;
      out[offset + 3] = alpha >> 1;
      continue;
    }
    const color = colorByIndex.get(value);
    if (!color) continue;
    out[offset] = color[0];
    out[offset + 1] = color[1];
    out[offset + 2] = color[2];
    out[offset + 3] = alpha;
  }
  return out;
}

export function digestLine(imageId: string, pixelsFromCam: number | undefined, isRepresentative: boolean): string {
  if (isRepresentative) return `${imageId} — representative (manual annotation)`;
  if (pixelsFromCam === undefined) return `${imageId} — no merge report`;
  return `${imageId} — ${pixelsFromCam} px from CAM`;
}
