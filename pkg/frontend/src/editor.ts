// Mask editor view: paints class indices over the representative image on
// a canvas pair (image below, mask overlay above) and exports a grayscale
// PNG through MaskLayer.

import { ApiClient } from "./api.js";
import { MaskLayer, Stroke } from "./masklayer.js";
import { decodeMaskPng } from "./maskpng.js";
import { cssColor } from "./palette.js";
import { renderOverlay } from "./overlay.js";
import type { LegendEntry, SequenceDetail } from "./types.js";

type Tool = "brush" | "eraser" | "polygon" | "fill";

export class EditorView {
  private layer!: MaskLayer;
  private legend: LegendEntry[] = [];
  private tool: Tool = "brush";
  private brushRadius = 4;
  private activeClass = 1;
  private polygonVertices: Array<[number, number]> = [];
  private strokePoints: Array<[number, number]> = [];
  private painting = false;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onSubmitted: (sequenceId: string) => void,
  ) {}

  async open(sequenceId: string, preloadAnnotation: boolean): Promise<void> {
    const { detail } = await this.api.sequenceDetail(sequenceId);
    this.legend = await this.api.legend();
    const imageBytes = await this.api.imageBytes(sequenceId, detail.representative_id);
    const image = await bytesToImage(imageBytes);

    let initial: Uint8Array | undefined;
    if (preloadAnnotation) {
      const stored = await this.api.annotation(sequenceId);
      const decoded = await decodeMaskPng(stored);
      initial = decoded.data;
    }
    this.layer = new MaskLayer(image.width, image.height, this.legend.length - 1, initial);
    this.render(sequenceId, detail, image);
  }

  private render(sequenceId: string, detail: SequenceDetail, image: HTMLImageElement): void {
    this.root.innerHTML = "";
    const header = el("div", "editor-header");
    header.append(
      el("h2", "", `Annotate ${sequenceId}`),
      el("p", "hint", `representative ${detail.representative_id}; paint every body of the subject, leave background empty`),
    );

    const toolbar = el("div", "toolbar");
    for (const tool of ["brush", "eraser", "polygon", "fill"] as Tool[]) {
      const button = el("button", "tool", tool) as HTMLButtonElement;
      button.dataset.tool = tool;
      button.onclick = () => {
        this.tool = tool;
        this.finishPolygon();
        toolbar.querySelectorAll("button.tool").forEach((b) => b.classList.remove("active"));
        button.classList.add("active");
      };
      if (tool === this.tool) button.classList.add("active");
      toolbar.append(button);
    }
    const radius = el("input") as HTMLInputElement;
    radius.type = "range";
    radius.min = "1";
    radius.max = "32";
    radius.value = String(this.brushRadius);
    radius.oninput = () => (this.brushRadius = Number(radius.value));
    toolbar.append(el("span", "hint", "size"), radius);

    const classBar = el("div", "classbar");
    for (const entry of this.legend) {
      if (entry.index === 0) continue;
      const swatch = el("button", "swatch", entry.name) as HTMLButtonElement;
      swatch.style.borderColor = cssColor(entry.color);
      if (entry.index === this.activeClass) swatch.classList.add("active");
      swatch.onclick = () => {
        this.activeClass = entry.index;
        classBar.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
        swatch.classList.add("active");
      };
      classBar.append(swatch);
    }

    const stage = el("div", "stage");
    const imageCanvas = el("canvas") as HTMLCanvasElement;
    const maskCanvas = el("canvas") as HTMLCanvasElement;
    imageCanvas.width = maskCanvas.width = image.width;
    imageCanvas.height = maskCanvas.height = image.height;
    imageCanvas.getContext("2d")!.drawImage(image, 0, 0);
    stage.append(imageCanvas, maskCanvas);

    const redraw = () => {
      const ctx = maskCanvas.getContext("2d")!;
      const rgba = renderOverlay(
        { width: this.layer.width, height: this.layer.height, data: this.layer.snapshot() },
        this.legend,
        0.55,
      );
      ctx.putImageData(new ImageData(rgba, this.layer.width, this.layer.height), 0, 0);
    };

    const toMask = (event: MouseEvent): [number, number] => {
      const rect = maskCanvas.getBoundingClientRect();
      return [
        ((event.clientX - rect.left) / rect.width) * this.layer.width,
        ((event.clientY - rect.top) / rect.height) * this.layer.height,
      ];
    };

    maskCanvas.onmousedown = (event) => {
      const point = toMask(event);
      if (this.tool === "polygon") {
        this.polygonVertices.push(point);
        return;
      }
      if (this.tool === "fill") {
        this.layer.apply({ kind: "fill", classIndex: this.activeClass, x: point[0], y: point[1] });
        redraw();
        return;
      }
      this.painting = true;
      this.strokePoints = [point];
    };
    maskCanvas.onmousemove = (event) => {
      if (!this.painting) return;
      this.strokePoints.push(toMask(event));
    };
    const endStroke = () => {
      if (!this.painting) return;
      this.painting = false;
      const classIndex = this.tool === "eraser" ? 0 : this.activeClass;
      const stroke: Stroke = {
        kind: "brush",
        classIndex,
        points: this.strokePoints,
        radius: this.brushRadius,
      };
      this.layer.apply(stroke);
      this.strokePoints = [];
      redraw();
    };
    maskCanvas.onmouseup = endStroke;
    maskCanvas.onmouseleave = endStroke;
    maskCanvas.ondblclick = () => {
      this.finishPolygon();
      redraw();
    };

    const actions = el("div", "actions");
    const undoButton = el("button", "", "undo") as HTMLButtonElement;
    undoButton.onclick = () => {
      this.layer.undo();
      redraw();
    };
    const redoButton = el("button", "", "redo") as HTMLButtonElement;
    redoButton.onclick = () => {
      this.layer.redo();
      redraw();
    };
    const status = el("span", "status");
    const submit = el("button", "primary", "submit annotation") as HTMLButtonElement;
    submit.onclick = async () => {
      this.finishPolygon();
      redraw();
      const result = this.layer.exportPng();
      if (!result.ok) {
        status.textContent = `export blocked: ${result.reason}`;
        return;
      }
      submit.disabled = true;
      status.textContent = "uploading + propagating…";
      try {
        await this.api.putAnnotation(sequenceId, result.png);
        status.textContent = "propagated";
        this.onSubmitted(sequenceId);
      } catch (error) {
        status.textContent = String(error);
      } finally {
        submit.disabled = false;
      }
    };
    actions.append(undoButton, redoButton, submit, status);

    this.root.append(header, toolbar, classBar, stage, actions);
    redraw();
  }

  private finishPolygon(): void {
    if (this.polygonVertices.length >= 3) {
      this.layer.apply({
        kind: "polygon",
        classIndex: this.activeClass,
        vertices: this.polygonVertices,
      });
    }
    this.polygonVertices = [];
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

async function bytesToImage(bytes: Uint8Array): Promise<HTMLImageElement> {
  const blob = new Blob([bytes.slice().buffer as ArrayBuffer]);
  const url = URL.createObjectURL(blob);
  try {
    const image = new Image();
    await new Promise<void>((resolve, reject) => {
      image.onload = () => resolve();
      image.onerror = () => reject(new Error("cannot decode image"));
      image.src = url;
    });
    return image;
  } finally {
    URL.revokeObjectURL(url);
  }
}
