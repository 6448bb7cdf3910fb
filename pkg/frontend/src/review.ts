// Propagation review: every sequence member with its merged-mask overlay,
// merge digests, opacity control, and a revise-annotation escape hatch.

import { ApiClient } from "./api.js";
import { decodeMaskPng } from "./maskpng.js";
import { digestLine, renderOverlay } from "./overlay.js";
import type { LegendEntry, SequenceDetail } from "./types.js";

export class ReviewView {
  private etag: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onRevise: (sequenceId: string) => void,
  ) {}

  async open(sequenceId: string): Promise<void> {
    const { detail, etag } = await this.api.sequenceDetail(sequenceId);
    this.etag = etag;
    const legend = await this.api.legend();
    this.root.innerHTML = "";

    const header = document.createElement("div");
    header.className = "review-header";
    const title = document.createElement("h2");
    title.textContent = `Review ${sequenceId} (${detail.status})`;
    const opacity = document.createElement("input");
    opacity.type = "range";
    opacity.min = "0";
    opacity.max = "100";
    opacity.value = "55";
    const revise = document.createElement("button");
    revise.textContent = "revise annotation";
    revise.onclick = () => this.onRevise(sequenceId);
    const stale = document.createElement("div");
    stale.className = "banner hidden";
    stale.textContent = "workspace changed underneath this view — reload to see current state";
    header.append(title, opacity, revise, stale);
    this.root.append(header);

    const panels = document.createElement("div");
    panels.className = "panels";
    this.root.append(panels);

    const redraws: Array<(opacity: number) => void> = [];
    for (const imageId of detail.image_ids) {
      redraws.push(await this.panel(panels, sequenceId, imageId, detail, legend));
    }
    opacity.oninput = () => {
      for (const redraw of redraws) redraw(Number(opacity.value) / 100);
    };

    // entity-tag staleness check, aligned with the 2s polling cadence
    const timer = setInterval(async () => {
      if (!document.body.contains(this.root)) {
        clearInterval(timer);
        return;
      }
      try {
        const current = await this.api.sequenceDetail(sequenceId);
        if (current.etag !== this.etag) stale.classList.remove("hidden");
      } catch {
        // offline handling lives on the board; keep the review quiet
      }
    }, 2000);
  }

  private async panel(
    container: HTMLElement,
    sequenceId: string,
    imageId: string,
    detail: SequenceDetail,
    legend: LegendEntry[],
  ): Promise<(opacity: number) => void> {
    const panel = document.createElement("figure");
    panel.className = "panel";
    const canvas = document.createElement("canvas");
    const caption = document.createElement("figcaption");
    const report = detail.propagation_summary[imageId];
    caption.textContent = digestLine(
      imageId,
      report?.pixels_from_cam,
      imageId === detail.representative_id,
    );
    panel.append(canvas, caption);
    container.append(panel);

    const [imageBytes, maskBytes] = await Promise.all([
      this.api.imageBytes(sequenceId, imageId),
      this.api.mergedMask(sequenceId, imageId),
    ]);
    const mask = await decodeMaskPng(maskBytes);
    canvas.width = mask.width;
    canvas.height = mask.height;
    const ctx = canvas.getContext("2d")!;
    const image = new Image();
    const url = URL.createObjectURL(new Blob([imageBytes.slice().buffer as ArrayBuffer]));
    await new Promise<void>((resolve) => {
      image.onload = () => resolve();
      image.onerror = () => resolve();
      image.src = url;
    });
    URL.revokeObjectURL(url);

    const redraw = (opacity: number) => {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      ctx.drawImage(image, 0, 0);
      const overlay = renderOverlay(mask, legend, opacity);
      const buffer = document.createElement("canvas");
      buffer.width = mask.width;
      buffer.height = mask.height;
      buffer.getContext("2d")!.putImageData(new ImageData(overlay, mask.width, mask.height), 0, 0);
      ctx.drawImage(buffer, 0, 0);
    };
    redraw(0.55);
    return redraw;
  }
}
