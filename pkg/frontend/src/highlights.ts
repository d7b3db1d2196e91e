/** Turn matched pattern spans into renderable text segments.
 *
 * Segment boundaries fall on every span edge, so overlapping spans from
 * different patterns stack: a segment carries every category covering it
 * (rendered as layered badges). Offsets are clamped to the text bounds.
 */

import type { PatternSpan } from './types.js';

export interface Segment {
  text: string;
  start: number;
  end: number;
  /** categories covering this segment, in first-seen order; empty = plain */
  categories: string[];
  patternIndices: number[];
}

export const CATEGORY_COLORS: Record<string, string> = {
  SD_MODE: '#7b6fb8',
  LOSS_OF_SDC: '#2677b3',
  LOAC: '#c77f2e',
  ISOL_FLOW: '#35836d',
  LOCA: '#b3524f',
  LOOP: '#a84f9e',
  SFP: '#6d7f34',
};

export function colorFor(category: string | undefined): string {
  return (category && CATEGORY_COLORS[category]) || '#777777';
}

export function renderHighlights(text: string, spans: PatternSpan[]): Segment[] {
  if (text.length === 0) {
    return [];
  }
  const clamped = spans
    .map((span) => ({
      ...span,
      start: Math.max(0, Math.min(span.start, text.length)),
      end: Math.max(0, Math.min(span.end, text.length)),
    }))
    .filter((span) => span.start < span.end);

  const edges = new Set<number>([0, text.length]);
  for (const span of clamped) {
    edges.add(span.start);
    edges.add(span.end);
  }
  const cuts = [...edges].sort((a, b) => a - b);

  const segments: Segment[] = [];
  for (let i = 0; i + 1 < cuts.length; i += 1) {
    const [start, end] = [cuts[i], cuts[i + 1]];
    const covering = clamped.filter((span) => span.start <= start && end <= span.end);
    const categories: string[] = [];
    const patternIndices: number[] = [];
    for (const span of covering) {
      const category = span.category ?? 'UNKNOWN';
      if (!categories.includes(category)) categories.push(category);
      if (!patternIndices.includes(span.pattern_index)) patternIndices.push(span.pattern_index);
    }
    segments.push({ text: text.slice(start, end), start, end, categories, patternIndices });
  }
  return segments;
}
