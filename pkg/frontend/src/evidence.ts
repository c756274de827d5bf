// Evidence highlighting: locate each evidence excerpt as an exact substring
// of the source text and split the source into highlighted/plain segments.

export interface HighlightSegment {
  text: string;
  highlighted: boolean;
}

interface Range {
  start: number;
  end: number;
}

/** All occurrence ranges of `needle` inside `haystack` (exact match). */
function occurrences(haystack: string, needle: string): Range[] {
  const ranges: Range[] = [];
  if (!needle) return ranges;
  let from = 0;
  for (;;) {
    const at = haystack.indexOf(needle, from);
    if (at < 0) break;
    ranges.push({ start: at, end: at + needle.length });
    from = at + 1;
  }
  return ranges;
}

function mergeRanges(ranges: Range[]): Range[] {
  const sorted = [...ranges].sort((a, b) => a.start - b.start || a.end - b.end);
  const merged: Range[] = [];
  for (const range of sorted) {
    const last = merged[merged.length - 1];
    if (last && range.start <= last.end) {
      last.end = Math.max(last.end, range.end);
    } else {
      merged.push({ ...range });
    }
  }
  return merged;
}

export interface HighlightResult {
  segments: HighlightSegment[];
  /** Evidence strings that were not exact substrings of the source. */
  unmatched: string[];
}

export function highlightEvidence(sourceText: string, evidenceTexts: string[]): HighlightResult {
  const ranges: Range[] = [];
  const unmatched: string[] = [];
  for (const text of evidenceTexts) {
    const found = occurrences(sourceText, text);
    if (found.length === 0) {
      unmatched.push(text);
    } else {
      ranges.push(...found);
    }
  }

  const segments: HighlightSegment[] = [];
  let cursor = 0;
  for (const range of mergeRanges(ranges)) {
    if (range.start > cursor) {
      segments.push({ text: sourceText.slice(cursor, range.start), highlighted: false });
    }
    segments.push({ text: sourceText.slice(range.start, range.end), highlighted: true });
    cursor = range.end;
  }
  if (cursor < sourceText.length) {
    segments.push({ text: sourceText.slice(cursor), highlighted: false });
  }
  return { segments, unmatched };
}
