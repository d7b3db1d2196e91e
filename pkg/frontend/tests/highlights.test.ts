import { describe, expect, it } from 'vitest';

import { colorFor, renderHighlights } from '../src/highlights.js';

const TEXT = 'loss of SDC during Mode 5';

describe('renderHighlights', () => {
  it('returns one plain segment when there are no spans', () => {
    const segments = renderHighlights(TEXT, []);
    expect(segments).toHaveLength(1);
    expect(segments[0].text).toBe(TEXT);
    expect(segments[0].categories).toEqual([]);
  });

  it('returns nothing for empty text', () => {
    expect(renderHighlights('', [])).toEqual([]);
  });

  it('produces exactly one highlighted segment for one span', () => {
    const segments = renderHighlights(TEXT, [
      { pattern_index: 9, category: 'LOSS_OF_SDC', start: 0, end: 11 },
    ]);
    const marked = segments.filter((s) => s.categories.length > 0);
    expect(marked).toHaveLength(1);
    expect(marked[0].text).toBe('loss of SDC');
    expect(marked[0].categories).toEqual(['LOSS_OF_SDC']);
    expect(segments.map((s) => s.text).join('')).toBe(TEXT);
  });

  it('stacks badges where two categories overlap', () => {
    const segments = renderHighlights(TEXT, [
      { pattern_index: 9, category: 'LOSS_OF_SDC', start: 0, end: 11 },
      { pattern_index: 12, category: 'ISOL_FLOW', start: 8, end: 11 },
    ]);
    const stacked = segments.find((s) => s.categories.length === 2);
    expect(stacked).toBeDefined();
    expect(stacked!.text).toBe('SDC');
    expect(stacked!.categories).toEqual(['LOSS_OF_SDC', 'ISOL_FLOW']);
    expect(stacked!.patternIndices).toEqual([9, 12]);
    // the partial overlap still renders every character exactly once
    expect(segments.map((s) => s.text).join('')).toBe(TEXT);
  });

  it('clamps spans to the text bounds', () => {
    const segments = renderHighlights('short', [
      { pattern_index: 0, category: 'SD_MODE', start: 2, end: 400 },
      { pattern_index: 1, category: 'LOOP', start: -5, end: 1 },
    ]);
    for (const segment of segments) {
      expect(segment.start).toBeGreaterThanOrEqual(0);
      expect(segment.end).toBeLessThanOrEqual(5);
    }
    expect(segments.map((s) => s.text).join('')).toBe('short');
  });

  it('drops zero-width spans', () => {
    const segments = renderHighlights(TEXT, [
      { pattern_index: 3, category: 'LOCA', start: 4, end: 4 },
    ]);
    expect(segments.every((s) => s.categories.length === 0)).toBe(true);
  });
});

describe('colorFor', () => {
  it('maps every vocabulary category to a color', () => {
    for (const category of ['SD_MODE', 'LOSS_OF_SDC', 'LOAC', 'ISOL_FLOW', 'LOCA', 'LOOP', 'SFP']) {
      expect(colorFor(category)).toMatch(/^#[0-9a-f]{6}$/);
    }
  });

  it('falls back to grey for unknown categories', () => {
    expect(colorFor('MYSTERY')).toBe('#777777');
    expect(colorFor(undefined)).toBe('#777777');
  });
});
