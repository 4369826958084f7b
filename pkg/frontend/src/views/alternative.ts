/** Alternative view: per-segment candidate thumbnails; click substitutes. */

import type { ApiClient, ProjectPayload } from "../api";

export class AlternativeView {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly onChoose: (segment: number, candidateId: string) => void,
  ) {
    root.classList.add("alternative-view");
    root.innerHTML = "<h2>Alternatives</h2><div data-role='segments'></div>";
  }

  render(project: ProjectPayload, chosen: (segment: number) => string | null): void {
    const container = this.root.querySelector("[data-role='segments']")!;
    container.textContent = "";
    for (const slot of project.illustrations) {
      const row = document.createElement("div");
      row.className = "candidate-row";
      row.dataset.segment = String(slot.index);
      const label = document.createElement("span");
      label.textContent = `segment ${slot.index}`;
      row.appendChild(label);
      for (const candidateId of slot.candidate_ids) {
        const img = document.createElement("img");
        img.src = this.api.frameUrl(project.id, candidateId);
        img.alt = candidateId;
        img.dataset.candidate = candidateId;
        img.classList.toggle("chosen", chosen(slot.index) === candidateId);
        img.addEventListener("click", () => this.onChoose(slot.index, candidateId));
        row.appendChild(img);
      }
      container.appendChild(row);
    }
  }

  markChosen(segment: number, candidateId: string): void {
    const row = this.root.querySelector(`[data-segment='${segment}']`);
    if (!row) return;
    for (const img of row.querySelectorAll("img")) {
      img.classList.toggle("chosen", img.dataset.candidate === candidateId);
    }
  }
}
