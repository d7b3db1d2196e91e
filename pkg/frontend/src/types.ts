/** Shared types mirroring the review service's JSON payloads. */

/** The seven raw event types an analyst may assign; merged or excluded
 * classes are a pipeline concern and never appear as label options. */
export const RAW_LABELS = [
  'ISOL',
  'FLOW',
  'LOCA',
  'LOAC',
  'LOOP',
  'SFP',
  'NON_SDIE',
] as const;

export type RawLabel = (typeof RAW_LABELS)[number];

export const STAGE2_CLASSES = ['ISOL_FLOW', 'LOAC', 'LOOP', 'NON_SDIE'] as const;

export interface PatternSpan {
  pattern_index: number;
  category?: string;
  /** character offsets into the item text */
  start: number;
  end: number;
}

export interface ReviewItem {
  event_id: string;
  text: string;
  predicted_class: string | null;
  probabilities: number[];
  spans: PatternSpan[];
  status: 'pending' | 'labeled' | 'skipped';
  analyst_label: string | null;
  note: string | null;
}

export interface Progress {
  labeled: number;
  total: number;
}

export interface Project {
  id: string;
  name: string;
  corpus_ref: string;
}
