/** Music view: drag-and-drop or file-picker upload of MP3/WAV. */

export class MusicView {
  private readonly status: HTMLElement;
  private readonly input: HTMLInputElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly onUpload: (file: File) => Promise<void>,
  ) {
    root.classList.add("music-view");
    root.innerHTML = `
      <h2>Music</h2>
      <div class="drop-zone" data-role="drop-zone">
        Drop an MP3/WAV here or
        <label class="picker">browse<input type="file" accept=".mp3,.wav,audio/mpeg,audio/wav" hidden></label>
      </div>
      <div class="status" data-role="upload-status"></div>
    `;
    this.status = root.querySelector('[data-role="upload-status"]')!;
    this.input = root.querySelector("input[type=file]")!;
    const zone = root.querySelector('[data-role="drop-zone"]')!;

    this.input.addEventListener("change", () => {
      const file = this.input.files?.[0];
      if (file) void this.handle(file);
    });
    zone.addEventListener("dragover", (ev) => ev.preventDefault());
    zone.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const file = (ev as DragEvent).dataTransfer?.files?.[0];
      if (file) void this.handle(file);
    });
  }

  acceptable(name: string): boolean {
    return /\.(mp3|wav)$/i.test(name);
  }

  async handle(file: File): Promise<void> {
    if (!this.acceptable(file.name)) {
      this.showError(`only MP3 or WAV files are accepted (got "${file.name}")`);
      return;
    }
    this.status.textContent = `uploading ${file.name}…`;
    this.status.classList.remove("error");
    try {
      await this.onUpload(file);
      this.status.textContent = `${file.name} uploaded`;
    } catch (err) {
      this.showError(err instanceof Error ? err.message : String(err));
    }
  }

  showError(message: string): void {
    this.status.textContent = message;
    this.status.classList.add("error");
  }
}
