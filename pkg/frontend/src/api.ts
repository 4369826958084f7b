/** Typed client for the lyrivid editing service. */

export interface LyricLine {
  index: number;
  start: number;
  text: string;
}

export interface IllustrationSlot {
  index: number;
  candidate_ids: string[];
  chosen_id: string;
}

export interface ProjectPayload {
  id: string;
  audio_path: string;
  keywords: [string, string][];
  seed: number;
  fps: number;
  clip_seconds: number;
  duration_seconds: number | null;
  lyric_lines: LyricLine[];
  illustrations: IllustrationSlot[];
  ordering: number[];
  video_path: string | null;
  subtitles_path: string | null;
  needs_render: boolean;
  active_job: string | null;
}

export interface JobPayload {
  id: string;
  project_id: string;
  state: "queued" | "running" | "done" | "failed";
  stage: string | null;
  error: string | null;
  progress: number;
}

export interface KeywordEntry {
  keyword: string;
  provenance: "selected" | "prompt-book";
}

export interface KeywordCategory {
  name: string;
  keywords: KeywordEntry[];
}

export interface KeywordTaxonomy {
  categories: KeywordCategory[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.detail === "string") detail = payload.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private json(body: unknown): RequestInit {
    return {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  async uploadProject(file: Blob, filename: string): Promise<string> {
    const form = new FormData();
    form.append("file", file, filename);
    const payload = await this.request<{ id: string }>("/projects", {
      method: "POST",
      body: form,
    });
    return payload.id;
  }

  getKeywords(): Promise<KeywordTaxonomy> {
    return this.request("/keywords");
  }

  getProject(id: string): Promise<ProjectPayload> {
    return this.request(`/projects/${id}`);
  }

  putKeywords(id: string, keywords: [string, string][]): Promise<unknown> {
    return this.request(`/projects/${id}/keywords`, this.json({ keywords }));
  }

  async generate(id: string): Promise<string> {
    const payload = await this.request<{ job: string }>(`/projects/${id}/generate`, {
      method: "POST",
    });
    return payload.job;
  }

  getJob(id: string): Promise<JobPayload> {
    return this.request(`/jobs/${id}`);
  }

  putOrder(id: string, ordering: number[]): Promise<unknown> {
    return this.request(`/projects/${id}/order`, this.json({ ordering }));
  }

  putChoice(id: string, segment: number, candidateId: string): Promise<unknown> {
    return this.request(
      `/projects/${id}/segments/${segment}/choice`,
      this.json({ candidate_id: candidateId }),
    );
  }

  videoUrl(id: string): string {
    return `${this.base}/projects/${id}/video`;
  }

  subtitlesUrl(id: string): string {
    return `${this.base}/projects/${id}/subtitles`;
  }

  frameUrl(id: string, frameId: string): string {
    return `${this.base}/projects/${id}/frames/${frameId}.png`;
  }

  async fetchSubtitles(id: string): Promise<string> {
    const response = await this.fetchFn(this.subtitlesUrl(id));
    if (!response.ok) throw new ApiError(response.status, "no subtitles");
    return response.text();
  }
}
