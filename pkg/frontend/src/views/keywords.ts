/** Keywords view: six category groups, single-select per category. */

import type { KeywordTaxonomy } from "../api";

export class KeywordsView {
  private selection = new Map<string, string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly onChange: (selection: [string, string][]) => void,
  ) {
    root.classList.add("keywords-view");
    root.innerHTML = "<h2>Keywords</h2><div data-role='groups'></div>";
  }

  render(taxonomy: KeywordTaxonomy, selected: [string, string][] = []): void {
    this.selection = new Map(selected);
    const groups = this.root.querySelector("[data-role='groups']")!;
    groups.textContent = "";
    for (const category of taxonomy.categories) {
      const section = document.createElement("section");
      section.className = "keyword-category";
      const heading = document.createElement("h3");
      heading.textContent = category.name;
      section.appendChild(heading);
      for (const entry of category.keywords) {
        const button = document.createElement("button");
        button.type = "button";
        button.textContent = entry.keyword;
        button.dataset.category = category.name;
        button.dataset.keyword = entry.keyword;
        if (entry.provenance === "selected") button.classList.add("experiment-selected");
        if (this.selection.get(category.name) === entry.keyword) button.classList.add("active");
        button.addEventListener("click", () => this.toggle(category.name, entry.keyword));
        section.appendChild(button);
      }
      groups.appendChild(section);
    }
  }

  toggle(category: string, keyword: string): void {
    if (this.selection.get(category) === keyword) {
      this.selection.delete(category);
    } else {
      this.selection.set(category, keyword); // single-select per category
    }
    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button[data-category]")) {
      const active =
        this.selection.get(button.dataset.category!) === button.dataset.keyword;
      button.classList.toggle("active", active);
    }
    this.onChange(this.current());
  }

  current(): [string, string][] {
    return [...this.selection.entries()];
  }
}
