/** Editor bootstrap: wires the five views to the service API. */

import { ApiClient } from "./api";
import { JobPoller } from "./polling";
import {
  clearPending,
  displayedOrdering,
  chosenCandidate,
  hasPendingEdits,
  initialState,
  jobActive,
  stageChoice,
  stageReorder,
  withJob,
  withProject,
  type EditorState,
} from "./state";
import { AlternativeView } from "./views/alternative";
import { KeywordsView } from "./views/keywords";
import { LyricsView } from "./views/lyrics";
import { MusicView } from "./views/music";
import { VisualizationView } from "./views/visualization";

export class Editor {
  state: EditorState = initialState();
  readonly music: MusicView;
  readonly keywords: KeywordsView;
  readonly visualization: VisualizationView;
  readonly lyrics: LyricsView;
  readonly alternatives: AlternativeView;
  private readonly poller: JobPoller;
  private duration = 0;

  constructor(
    root: Document | HTMLElement,
    private readonly api: ApiClient,
    pollIntervalMs = 1000,
  ) {
    const el = (id: string) => {
      const node = root.querySelector<HTMLElement>(`#${id}`);
      if (!node) throw new Error(`missing container #${id}`);
      return node;
    };
    this.poller = new JobPoller(api, pollIntervalMs);
    this.music = new MusicView(el("music-view"), (file) => this.upload(file));
    this.keywords = new KeywordsView(el("keywords-view"), (sel) => void this.saveKeywords(sel));
    this.visualization = new VisualizationView(
      el("visualization-view"),
      api,
      () => void this.generate(),
      (ordering) => this.stageOrdering(ordering),
      (seconds) => this.onPlayback(seconds),
    );
    this.lyrics = new LyricsView(el("lyrics-view"), (seconds) => this.visualization.seek(seconds));
    this.alternatives = new AlternativeView(el("alternative-view"), api, (segment, candidate) =>
      void this.chooseCandidate(segment, candidate),
    );
  }

  async start(): Promise<void> {
    this.keywords.render(await this.api.getKeywords());
  }

  private async upload(file: File): Promise<void> {
    const id = await this.api.uploadProject(file, file.name);
    this.state = withProject(this.state, await this.api.getProject(id));
    this.refresh();
  }

  private async saveKeywords(selection: [string, string][]): Promise<void> {
    if (!this.state.projectId) return;
    try {
      await this.api.putKeywords(this.state.projectId, selection);
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
    }
  }

  private async generate(): Promise<void> {
    const id = this.state.projectId;
    if (!id || jobActive(this.state)) return;
    await this.flushPendingEdits();
    const jobId = await this.api.generate(id);
    this.poller.start(
      jobId,
      (job) => {
        this.state = withJob(this.state, job);
        this.visualization.showJob(job);
      },
      () => void this.reload(),
    );
  }

  private async flushPendingEdits(): Promise<void> {
    const id = this.state.projectId;
    if (!id) return;
    if (this.state.pendingOrdering) {
      await this.api.putOrder(id, this.state.pendingOrdering);
    }
    for (const [segment, candidate] of this.state.pendingChoices) {
      await this.api.putChoice(id, segment, candidate);
    }
    this.state = clearPending(this.state);
  }

  private async reload(): Promise<void> {
    if (!this.state.projectId) return;
    this.state = withProject(this.state, await this.api.getProject(this.state.projectId));
    this.state = withJob(this.state, null);
    this.refresh();
  }

  private stageOrdering(ordering: number[]): void {
    this.state = stageReorder(this.state, ordering);
    this.visualization.showDirty(hasPendingEdits(this.state));
  }

  private async chooseCandidate(segment: number, candidateId: string): Promise<void> {
    this.state = stageChoice(this.state, segment, candidateId);
    if (!this.state.error) {
      this.alternatives.markChosen(segment, candidateId);
      this.visualization.showDirty(hasPendingEdits(this.state));
    }
  }

  cancelPendingEdits(): void {
    this.state = clearPending(this.state);
    this.refresh();
  }

  private onPlayback(seconds: number): void {
    this.state.playbackPosition = seconds;
    this.lyrics.syncTo(seconds);
  }

  private refresh(): void {
    const project = this.state.project;
    if (!project) return;
    const lines = project.lyric_lines;
    const clipSeconds = project.clip_seconds || 5.0;
    const fallback = lines.length > 0 ? Math.max(...lines.map((l) => l.start)) + clipSeconds : 0;
    this.duration = project.duration_seconds ?? fallback;
    this.visualization.showProject(project, displayedOrdering(this.state));
    this.visualization.showJob(this.state.activeJob);
    this.visualization.showDirty(hasPendingEdits(this.state));
    this.lyrics.render(lines, this.duration);
    this.alternatives.render(project, (segment) => chosenCandidate(this.state, segment));
  }
}

if (typeof document !== "undefined" && document.getElementById("music-view")) {
  const editor = new Editor(document, new ApiClient(""));
  void editor.start();
}
