// Wire types for the /api/v1 annotation service.

export type SequenceStatus = "unannotated" | "annotated" | "propagated";

export interface SequenceSummary {
  id: string;
  size: number;
  representative_id: string;
  status: SequenceStatus;
}

export interface MergeReportDoc {
  pixels_from_sequence: number;
  pixels_from_cam: number;
  ignored_pixels: number;
  per_class_added: Record<string, number>;
}

export interface SequenceDetail {
  sequence_id: string;
  image_ids: string[];
  representative_id: string;
  status: SequenceStatus;
  annotated_at: string | null;
  propagation_summary: Record<string, MergeReportDoc>;
}

export interface LegendEntry {
  index: number;
  name: string;
  color: [number, number, number];
}

export interface MetricsDoc {
  mean_iou: number;
  fw_iou: number;
  fw_iou_literal: number;
  per_class_iou: Record<string, number>;
  excluded_classes: string[];
  pixels_evaluated: number;
  pixels_ignored: number;
}

export interface MaskBuffer {
  width: number;
  height: number;
  data: Uint8Array; // row-major class indices
}
