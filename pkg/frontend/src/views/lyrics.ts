/** Lyrics view: generated lines; clicking one seeks to its segment. */

import type { LyricLine } from "../api";
import { activeCueIndex, cuesFromLines, type Cue } from "../subtitles";

export class LyricsView {
  private cues: Cue[] = [];
  private items: HTMLElement[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly onSeek: (seconds: number) => void,
  ) {
    root.classList.add("lyrics-view");
    root.innerHTML = "<h2>Lyrics</h2><ol data-role='lines'></ol>";
  }

  render(lines: readonly LyricLine[], duration: number): void {
    this.cues = cuesFromLines(lines, duration);
    const list = this.root.querySelector("[data-role='lines']")!;
    list.textContent = "";
    this.items = [];
    for (const line of lines) {
      const item = document.createElement("li");
      item.textContent = line.text || "(instrumental)";
      item.dataset.start = String(line.start);
      item.addEventListener("click", () => this.onSeek(line.start));
      list.appendChild(item);
      this.items.push(item);
    }
  }

  /** Highlight the line whose segment contains the playback position. */
  syncTo(seconds: number): void {
    const active = activeCueIndex(this.cues, seconds);
    this.items.forEach((item, i) => item.classList.toggle("active", i === active));
  }
}
