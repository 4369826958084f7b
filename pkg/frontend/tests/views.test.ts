/** The five views rendered against a mocked API (no service, no network). */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, type JobPayload, type ProjectPayload } from "../src/api";
import { Editor } from "../src/main";
import { isPermutation } from "../src/reorder";

const TAXONOMY = {
  categories: [
    { name: "Medium", keywords: [{ keyword: "Painting", provenance: "selected" }] },
    { name: "Technique", keywords: [{ keyword: "Oil", provenance: "selected" }] },
    { name: "Spatial Composition", keywords: [{ keyword: "Steelyard", provenance: "selected" }] },
    { name: "Shot", keywords: [{ keyword: "Close-up", provenance: "prompt-book" }] },
    { name: "Color", keywords: [{ keyword: "Intense color", provenance: "selected" }] },
    { name: "Light", keywords: [{ keyword: "Warm light", provenance: "selected" }] },
  ],
};

function projectPayload(): ProjectPayload {
  return {
    id: "p1",
    audio_path: "audio.wav",
    keywords: [],
    seed: 0,
    fps: 6,
    clip_seconds: 5.0,
    duration_seconds: 15.0,
    lyric_lines: [
      { index: 0, start: 0, text: "river of light" },
      { index: 1, start: 5, text: "gold under the bridge" },
      { index: 2, start: 10, text: "night carries the song" },
    ],
    illustrations: [0, 1, 2].map((i) => ({
      index: i,
      candidate_ids: [0, 1, 2, 3].map((v) => `line${String(i).padStart(4, "0")}-cand${v}`),
      chosen_id: `line${String(i).padStart(4, "0")}-cand0`,
    })),
    ordering: [0, 1],
    video_path: "video.mp4",
    subtitles_path: "subtitles.vtt",
    needs_render: false,
    active_job: null,
  };
}

interface MockLog {
  requests: { method: string; path: string; body: unknown }[];
}

function mockedClient(log: MockLog, jobStates: JobPayload["state"][]): ApiClient {
  let jobCalls = 0;
  const project = projectPayload();
  const fakeFetch: typeof fetch = async (input, init) => {
    const url = typeof input === "string" ? input : input.toString();
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    log.requests.push({ method, path: url, body });
    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (url === "/keywords") return json(TAXONOMY);
    if (url === "/projects" && method === "POST") return json({ id: "p1" }, 201);
    if (url === "/projects/p1" && method === "GET") return json(project);
    if (url === "/projects/p1/generate") return json({ job: "j1" }, 202);
    if (url === "/jobs/j1") {
      const state = jobStates[Math.min(jobCalls++, jobStates.length - 1)]!;
      return json({
        id: "j1", project_id: "p1", state,
        stage: state === "running" ? "frames" : null,
        error: null, progress: state === "done" ? 1.0 : 0.5,
      });
    }
    if (url === "/projects/p1/order" && method === "PUT") {
      project.ordering = body.ordering;
      return json({ ok: true });
    }
    if (url.includes("/segments/") && method === "PUT") {
      const segment = Number(url.split("/segments/")[1]!.split("/")[0]);
      project.illustrations[segment]!.chosen_id = body.candidate_id;
      return json({ ok: true });
    }
    if (url === "/projects/p1/keywords" && method === "PUT") return json({ ok: true });
    return json({ detail: `unmocked ${method} ${url}` }, 404);
  };
  return new ApiClient("", fakeFetch);
}

function mountContainers(): void {
  document.body.innerHTML = `
    <section id="music-view"></section>
    <section id="keywords-view"></section>
    <section id="visualization-view"></section>
    <section id="lyrics-view"></section>
    <section id="alternative-view"></section>
  `;
}

async function settle(ms = 60): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, ms));
}

async function editorWithProject(log: MockLog, jobStates: JobPayload["state"][] = ["done"]) {
  mountContainers();
  const editor = new Editor(document, mockedClient(log, jobStates), 5);
  await editor.start();
  const file = new File([new Uint8Array([82, 73, 70, 70])], "song.wav", { type: "audio/wav" });
  await editor.music.handle(file);
  return editor;
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("five views from a mocked API", () => {
  it("keywords view renders all six categories", async () => {
    const log: MockLog = { requests: [] };
    await editorWithProject(log);
    const headings = [...document.querySelectorAll("#keywords-view h3")].map((h) => h.textContent);
    expect(headings).toEqual([
      "Medium", "Technique", "Spatial Composition", "Shot", "Color", "Light",
    ]);
    const painting = document.querySelector<HTMLButtonElement>(
      "button[data-keyword='Painting']",
    )!;
    painting.click();
    expect(painting.classList.contains("active")).toBe(true);
    await settle(10);
    const put = log.requests.find((r) => r.path === "/projects/p1/keywords");
    expect(put?.body).toEqual({ keywords: [["Medium", "Painting"]] });
  });

  it("music view rejects non-audio client-side without a request", async () => {
    mountContainers();
    const log: MockLog = { requests: [] };
    const editor = new Editor(document, mockedClient(log, ["done"]), 5);
    await editor.music.handle(new File([new Uint8Array(4)], "notes.ogg"));
    expect(document.querySelector("#music-view .status")!.textContent).toContain("only MP3 or WAV");
    expect(log.requests.filter((r) => r.path === "/projects")).toHaveLength(0);
  });

  it("lyrics view lists every generated line and seeks on click", async () => {
    const log: MockLog = { requests: [] };
    const editor = await editorWithProject(log);
    const items = [...document.querySelectorAll("#lyrics-view li")];
    expect(items.map((i) => i.textContent)).toEqual([
      "river of light", "gold under the bridge", "night carries the song",
    ]);
    (items[1] as HTMLElement).click();
    const video = document.querySelector<HTMLVideoElement>("video")!;
    expect(video.currentTime).toBe(5);
    editor.lyrics.syncTo(11.0);
    expect(items[2]!.classList.contains("active")).toBe(true);
  });

  it("visualization view wires video, subtitle track, and thumbnails", async () => {
    const log: MockLog = { requests: [] };
    await editorWithProject(log);
    const video = document.querySelector<HTMLVideoElement>("video")!;
    expect(video.src).toContain("/projects/p1/video");
    const track = video.querySelector("track")!;
    expect(track.getAttribute("src")).toContain("/projects/p1/subtitles");
    const thumbs = [...document.querySelectorAll<HTMLElement>(".thumb")];
    expect(thumbs.map((t) => t.dataset.source)).toEqual(["0", "1"]);
    const img = thumbs[0]!.querySelector("img")!;
    expect(img.getAttribute("src")).toContain("/frames/line0000-cand0.png");
  });

  it("alternative view shows candidates and marks substitutions dirty", async () => {
    const log: MockLog = { requests: [] };
    const editor = await editorWithProject(log);
    const rows = document.querySelectorAll("#alternative-view .candidate-row");
    expect(rows).toHaveLength(3);
    expect(rows[0]!.querySelectorAll("img")).toHaveLength(4);

    const candidate = rows[0]!.querySelectorAll("img")[2]!;
    candidate.click();
    await settle(5);
    expect(candidate.classList.contains("chosen")).toBe(true);
    const dirty = document.querySelector<HTMLElement>("[data-role='dirty']")!;
    expect(dirty.hidden).toBe(false);
    expect(editor.state.pendingChoices.get(0)).toBe("line0000-cand2");
  });

  it("generate disables the button while the job runs, then reloads", async () => {
    const log: MockLog = { requests: [] };
    await editorWithProject(log, ["running", "running", "done"]);
    const button = document.querySelector<HTMLButtonElement>("[data-role='generate']")!;
    expect(button.disabled).toBe(false);
    button.click();
    await settle(10);
    expect(button.disabled).toBe(true); // running
    await settle(80);
    expect(button.disabled).toBe(false); // settled and reloaded
    const generates = log.requests.filter((r) => r.path === "/projects/p1/generate");
    expect(generates).toHaveLength(1);
  });

  it("drag reorder stages a valid permutation and regeneration submits it", async () => {
    const log: MockLog = { requests: [] };
    const editor = await editorWithProject(log);
    const strip = editor.visualization.thumbnailStrip!;
    strip.beginDrag(1);
    strip.hoverOver(0);
    strip.drop();
    expect(document.querySelector<HTMLElement>("[data-role='dirty']")!.hidden).toBe(false);

    document.querySelector<HTMLButtonElement>("[data-role='generate']")!.click();
    await settle(100);
    const put = log.requests.find((r) => r.path === "/projects/p1/order");
    expect(put).toBeDefined();
    const ordering = (put!.body as { ordering: number[] }).ordering;
    expect(ordering).toEqual([1, 0]);
    expect(isPermutation(ordering, 2)).toBe(true);
  });

  it("cancelling pending edits reverts to the server snapshot", async () => {
    const log: MockLog = { requests: [] };
    const editor = await editorWithProject(log);
    const strip = editor.visualization.thumbnailStrip!;
    strip.beginDrag(0);
    strip.hoverOver(1);
    strip.drop();
    expect(editor.state.pendingOrdering).toEqual([1, 0]);
    editor.cancelPendingEdits();
    const thumbs = [...document.querySelectorAll<HTMLElement>(".thumb")];
    expect(thumbs.map((t) => t.dataset.source)).toEqual(["0", "1"]);
    expect(editor.state.pendingOrdering).toBeNull();
  });

  it("every rendered datum traces to a service response", async () => {
    const log: MockLog = { requests: [] };
    const editor = await editorWithProject(log);
    const payload = projectPayload();
    // lyric items, thumbnails, and candidates must all come from the payload
    const lyricTexts = [...document.querySelectorAll("#lyrics-view li")].map((l) => l.textContent);
    expect(lyricTexts).toEqual(payload.lyric_lines.map((l) => l.text));
    const candidateIds = [...document.querySelectorAll("#alternative-view img")].map(
      (i) => (i as HTMLElement).dataset.candidate,
    );
    const fromPayload = payload.illustrations.flatMap((s) => s.candidate_ids);
    expect(candidateIds).toEqual(fromPayload);
    expect(editor.state.project?.id).toBe("p1");
  });
});
