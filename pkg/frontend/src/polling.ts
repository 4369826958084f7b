/** Job polling at a fixed interval until the job settles. */

import type { ApiClient, JobPayload } from "./api";

export class JobPoller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly intervalMs: number = 1000,
  ) {}

  start(
    jobId: string,
    onUpdate: (job: JobPayload) => void,
    onSettled: (job: JobPayload) => void,
  ): void {
    this.stop();
    const tick = async () => {
      let job: JobPayload;
      try {
        job = await this.api.getJob(jobId);
      } catch {
        return; // transient fetch failure; next tick retries
      }
      onUpdate(job);
      if (job.state === "done" || job.state === "failed") {
        this.stop();
        onSettled(job);
      }
    };
    this.timer = setInterval(() => void tick(), this.intervalMs);
    void tick();
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get active(): boolean {
    return this.timer !== null;
  }
}

/** Await a job's completion (used by the live-service tests). */
export async function waitForJob(
  api: ApiClient,
  jobId: string,
  timeoutMs = 120_000,
  intervalMs = 250,
): Promise<JobPayload> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await api.getJob(jobId);
    if (job.state === "done" || job.state === "failed") return job;
    if (Date.now() > deadline) throw new Error(`job ${jobId} timed out in state ${job.state}`);
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
