// Deterministic per-class display colors (same golden-angle formula the
// service legend uses; the views prefer the legend endpoint and fall back
// to this when offline).

import type { LegendEntry } from "./types.js";

const GOLDEN_ANGLE = 137.50776405003785;

function hsvToRgb(h: number, s: number, v: number): [number, number, number] {
  const i = Math.floor(h * 6) % 6;
  const f = h * 6 - Math.floor(h * 6);
  const p = v * (1 - s);
  const q = v * (1 - s * f);
  const t = v * (1 - s * (1 - f));
  const pick: Array<[number, number, number]> = [
    [v, t, p],
    [q, v, p],
    [p, v, t],
    [p, q, v],
    [t, p, v],
    [v, p, q],
  ];
  const [r, g, b] = pick[i];
  return [Math.round(r * 255), Math.round(g * 255), Math.round(b * 255)];
}

export function classColor(index: number): [number, number, number] {
  if (index === 0) return [0, 0, 0];
  const hue = ((index * GOLDEN_ANGLE) % 360) / 360;
  return hsvToRgb(hue, 0.65, 0.9);
}

export function fallbackLegend(classNames: string[]): LegendEntry[] {
  return classNames.map((name, index) => ({ index, name, color: classColor(index) }));
}

export function cssColor(color: [number, number, number]): string {
  return `rgb(${color[0]}, ${color[1]}, ${color[2]})`;
}
