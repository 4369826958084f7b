// @vitest-environment node
/** Full editor flow against a live stub-backed service process.
 *
 * Spawns `lyrivid serve` with the committed toy checkpoint, then drives
 * the same client layer the views use: upload, keywords, generate, poll,
 * video, subtitle timing, reorder, substitute, regenerate. Runs in the
 * node environment: happy-dom's fetch applies browser CORS rules, which
 * do not apply to this server-to-server flow.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { waitForJob } from "../src/polling";
import { moveItem, isPermutation } from "../src/reorder";
import { cuesFromLines, parseVtt } from "../src/subtitles";

const PORT = 8700 + (process.pid % 900);
const BASE = `http://127.0.0.1:${PORT}`;
// vitest runs with cwd = frontend/; the checkpoint lives in the python test tree
const CHECKPOINT = resolve(process.cwd(), "../tests/fixtures/toy_checkpoint.pt");

let service: ChildProcess | null = null;

function syntheticWav(seconds: number, sampleRate = 16000): Uint8Array {
  const n = Math.round(seconds * sampleRate);
  const data = new Int16Array(n);
  for (let i = 0; i < n; i++) {
    const t = i / sampleRate;
    let value = 0.4 * Math.sin(2 * Math.PI * 220 * t) + 0.2 * Math.sin(2 * Math.PI * 330 * t);
    if (i % Math.round(0.5 * sampleRate) === 0) value += 0.5; // percussive clicks
    data[i] = Math.max(-32768, Math.min(32767, Math.round(value * 32767)));
  }
  const header = new ArrayBuffer(44);
  const view = new DataView(header);
  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };
  ascii(0, "RIFF");
  view.setUint32(4, 36 + n * 2, true);
  ascii(8, "WAVE");
  ascii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  ascii(36, "data");
  view.setUint32(40, n * 2, true);
  const out = new Uint8Array(44 + n * 2);
  out.set(new Uint8Array(header), 0);
  out.set(new Uint8Array(data.buffer), 44);
  return out;
}

async function waitForService(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/keywords`);
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("service did not become ready");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}

describe.skipIf(process.env.LYRIVID_SKIP_LIVE === "1")("live stub-backed service", () => {
  beforeAll(async () => {
    const root = mkdtempSync(join(tmpdir(), "lyrivid-live-"));
    const config = join(root, "service.json");
    writeFileSync(
      config,
      JSON.stringify({
        root: join(root, "data"),
        host: "127.0.0.1",
        port: PORT,
        checkpoint: CHECKPOINT,
        fps: 6,
        backend: { kind: "stub" },
      }),
    );
    service = spawn("lyrivid", ["serve", "--config", config], { stdio: "pipe" });
    await waitForService();
  }, 60000);

  afterAll(() => {
    service?.kill();
  });

  it("upload -> keywords -> generate -> poll -> video -> edit -> regenerate", async () => {
    const api = new ApiClient(BASE);

    // upload an 11 s clip: three 5 s segments, two transitions
    const wav = syntheticWav(11.0);
    const projectId = await api.uploadProject(new Blob([wav as BlobPart]), "live.wav");
    expect(projectId).toBeTruthy();

    await api.putKeywords(projectId, [
      ["Medium", "Painting"],
      ["Light", "Warm light"],
    ]);

    const jobId = await api.generate(projectId);
    const job = await waitForJob(api, jobId);
    expect(job.state).toBe("done");
    expect(job.progress).toBe(1);

    const project = await api.getProject(projectId);
    expect(project.lyric_lines).toHaveLength(3);
    expect(project.illustrations).toHaveLength(3);
    expect(project.ordering).toEqual([0, 1]);

    // video is a real MP4
    const video = await fetch(api.videoUrl(projectId));
    expect(video.status).toBe(200);
    const bytes = new Uint8Array(await video.arrayBuffer());
    expect(String.fromCharCode(...bytes.slice(4, 8))).toBe("ftyp");

    // ranged request for seeking
    const ranged = await fetch(api.videoUrl(projectId), { headers: { Range: "bytes=0-63" } });
    expect(ranged.status).toBe(206);

    // subtitle timing matches segment boundaries within one frame
    const vtt = parseVtt(await api.fetchSubtitles(projectId));
    expect(project.duration_seconds).toBeCloseTo(11.0, 1);
    const expected = cuesFromLines(project.lyric_lines, project.duration_seconds!);
    expect(vtt).toHaveLength(expected.length);
    const frame = 1 / project.fps;
    for (let i = 0; i < vtt.length; i++) {
      expect(Math.abs(vtt[i]!.start - expected[i]!.start)).toBeLessThanOrEqual(frame);
      expect(Math.abs(vtt[i]!.end - expected[i]!.end)).toBeLessThanOrEqual(frame);
    }

    // reorder through the drag model, then substitute an illustration
    const reordered = moveItem(project.ordering, 1, 0);
    expect(isPermutation(reordered, project.ordering.length)).toBe(true);
    await api.putOrder(projectId, reordered);
    const alternative = project.illustrations[0]!.candidate_ids[1]!;
    await api.putChoice(projectId, 0, alternative);

    const job2 = await waitForJob(api, await api.generate(projectId));
    expect(job2.state).toBe("done");

    const after = await api.getProject(projectId);
    expect(after.ordering).toEqual([1, 0]);
    expect(after.illustrations[0]!.chosen_id).toBe(alternative);

    // candidate thumbnails resolve
    const thumb = await fetch(api.frameUrl(projectId, alternative));
    expect(thumb.status).toBe(200);
  }, 120000);
});
