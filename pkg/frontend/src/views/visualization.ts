/** Visualization view: player with subtitle track, generate button with
 * job progress, and the drag-reorderable thumbnail strip. */

import type { ApiClient, JobPayload, ProjectPayload } from "../api";
import { ThumbnailStrip } from "../reorder";

export class VisualizationView {
  private readonly video: HTMLVideoElement;
  private readonly button: HTMLButtonElement;
  private readonly progress: HTMLElement;
  private readonly dirty: HTMLElement;
  private strip: ThumbnailStrip | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly onGenerate: () => void,
    private readonly onReorder: (ordering: number[]) => void,
    private readonly onTime: (seconds: number) => void,
  ) {
    root.classList.add("visualization-view");
    root.innerHTML = `
      <h2>Visualization</h2>
      <video data-role="player" controls crossorigin="anonymous"></video>
      <div class="controls">
        <button type="button" data-role="generate">Generate</button>
        <span data-role="progress"></span>
        <span data-role="dirty" class="dirty" hidden>unsaved edits — regenerate to apply</span>
      </div>
      <div class="thumb-strip" data-role="thumbs"></div>
    `;
    this.video = root.querySelector("[data-role='player']")!;
    this.button = root.querySelector("[data-role='generate']")!;
    this.progress = root.querySelector("[data-role='progress']")!;
    this.dirty = root.querySelector("[data-role='dirty']")!;
    this.button.addEventListener("click", () => this.onGenerate());
    this.video.addEventListener("timeupdate", () => this.onTime(this.video.currentTime));
  }

  showProject(project: ProjectPayload, ordering: number[]): void {
    if (project.video_path) {
      const source = this.api.videoUrl(project.id);
      if (this.video.dataset.src !== source) {
        this.video.dataset.src = source;
        this.video.src = source;
        let track = this.video.querySelector("track");
        if (!track) {
          track = document.createElement("track");
          track.kind = "subtitles";
          track.label = "Lyrics";
          track.default = true;
          this.video.appendChild(track);
        }
        track.src = this.api.subtitlesUrl(project.id);
      }
    }
    const thumbs = this.root.querySelector<HTMLElement>("[data-role='thumbs']")!;
    this.strip = new ThumbnailStrip(thumbs, ordering, this.onReorder, (source) => {
      const slot = project.illustrations.find((s) => s.index === source);
      const img = document.createElement("img");
      img.alt = `segment ${source}`;
      if (slot) img.src = this.api.frameUrl(project.id, slot.chosen_id);
      return img;
    });
  }

  get thumbnailStrip(): ThumbnailStrip | null {
    return this.strip;
  }

  showJob(job: JobPayload | null): void {
    const active = job !== null && (job.state === "queued" || job.state === "running");
    this.button.disabled = active;
    if (!job) {
      this.progress.textContent = "";
    } else if (active) {
      const pct = Math.round(job.progress * 100);
      this.progress.textContent = `${job.state}${job.stage ? ` (${job.stage})` : ""} ${pct}%`;
    } else if (job.state === "failed") {
      this.progress.textContent = `failed: ${job.error ?? "unknown error"}`;
    } else {
      this.progress.textContent = "done";
    }
  }

  showDirty(dirty: boolean): void {
    this.dirty.hidden = !dirty;
  }

  seek(seconds: number): void {
    this.video.currentTime = seconds;
  }
}
