/** Subtitle cue math and WebVTT parsing (kept in sync with the service). */

import type { LyricLine } from "./api";

export interface Cue {
  start: number;
  end: number;
  text: string;
}

/**
 * Cue windows derived from lyric lines: line i spans from its anchor to
 * the next line's start; the first window is pulled back to 0 and the
 * last runs to the end of the audio. Mirrors the service's segment
 * boundaries.
 */
export function cuesFromLines(lines: readonly LyricLine[], duration: number): Cue[] {
  if (lines.length === 0) return [];
  const sorted = [...lines].sort((a, b) => a.start - b.start);
  const cues: Cue[] = [];
  for (let i = 0; i < sorted.length; i++) {
    const line = sorted[i]!;
    const start = i === 0 ? 0 : line.start;
    const end = i + 1 < sorted.length ? sorted[i + 1]!.start : duration;
    cues.push({ start, end, text: line.text });
  }
  return cues;
}

/** Index of the cue active at time t, or -1 outside all cues. */
export function activeCueIndex(cues: readonly Cue[], t: number): number {
  for (let i = 0; i < cues.length; i++) {
    const cue = cues[i]!;
    const isLast = i === cues.length - 1;
    if (t >= cue.start && (t < cue.end || (isLast && t <= cue.end))) return i;
  }
  return -1;
}

const TIMESTAMP = /^(\d{2,}):(\d{2}):(\d{2})\.(\d{3})$/;

function parseTimestamp(text: string): number {
  const match = TIMESTAMP.exec(text.trim());
  if (!match) throw new Error(`bad WebVTT timestamp: ${text}`);
  const [, h, m, s, ms] = match;
  return Number(h) * 3600 + Number(m) * 60 + Number(s) + Number(ms) / 1000;
}

/** Minimal WebVTT parser for the service's sidecar tracks. */
export function parseVtt(text: string): Cue[] {
  const lines = text.split(/\r?\n/);
  if (!lines[0]?.startsWith("WEBVTT")) throw new Error("not a WebVTT document");
  const cues: Cue[] = [];
  let i = 1;
  while (i < lines.length) {
    const line = lines[i]!.trim();
    if (line.includes("-->")) {
      const [from, to] = line.split("-->");
      const textLines: string[] = [];
      i += 1;
      while (i < lines.length && lines[i]!.trim() !== "") {
        textLines.push(lines[i]!);
        i += 1;
      }
      cues.push({
        start: parseTimestamp(from ?? ""),
        end: parseTimestamp(to ?? ""),
        text: textLines.join("\n"),
      });
    }
    i += 1;
  }
  return cues;
}
