/** Pure drag-reorder model: every operation yields a valid permutation. */

export function isPermutation(order: readonly number[], length: number): boolean {
  if (order.length !== length) return false;
  const seen = new Set(order);
  if (seen.size !== length) return false;
  for (let i = 0; i < length; i++) if (!seen.has(i)) return false;
  return true;
}

/** Move the item at `from` so it lands at position `to`; indices clamp. */
export function moveItem(order: readonly number[], from: number, to: number): number[] {
  const result = [...order];
  if (result.length === 0) return result;
  const clamp = (i: number) => Math.max(0, Math.min(result.length - 1, Math.trunc(i)));
  const source = clamp(from);
  const target = clamp(to);
  const [item] = result.splice(source, 1);
  result.splice(target, 0, item as number);
  return result;
}

export interface DragSession {
  source: number;
  hover: number;
}

/**
 * DOM wiring for a horizontal thumbnail strip. The drag math lives in
 * `moveItem`; event handlers delegate to the testable begin/hover/drop
 * methods.
 */
export class ThumbnailStrip {
  private session: DragSession | null = null;

  constructor(
    private readonly root: HTMLElement,
    private order: number[],
    private readonly onReorder: (ordering: number[]) => void,
    private readonly renderThumb: (source: number) => HTMLElement,
  ) {
    this.render();
  }

  get ordering(): readonly number[] {
    return this.order;
  }

  setOrdering(order: number[]): void {
    this.order = [...order];
    this.render();
  }

  beginDrag(position: number): void {
    if (position < 0 || position >= this.order.length) return;
    this.session = { source: position, hover: position };
  }

  hoverOver(position: number): void {
    if (!this.session) return;
    this.session.hover = Math.max(0, Math.min(this.order.length - 1, position));
  }

  drop(): number[] | null {
    if (!this.session) return null;
    const { source, hover } = this.session;
    this.session = null;
    if (source === hover) return null;
    this.order = moveItem(this.order, source, hover);
    this.render();
    this.onReorder([...this.order]);
    return [...this.order];
  }

  cancelDrag(): void {
    this.session = null;
  }

  private render(): void {
    this.root.textContent = "";
    this.order.forEach((source, position) => {
      const cell = document.createElement("div");
      cell.className = "thumb";
      cell.draggable = true;
      cell.dataset.position = String(position);
      cell.dataset.source = String(source);
      cell.appendChild(this.renderThumb(source));
      cell.addEventListener("dragstart", () => this.beginDrag(position));
      cell.addEventListener("dragover", (ev) => {
        ev.preventDefault();
        this.hoverOver(position);
      });
      cell.addEventListener("drop", (ev) => {
        ev.preventDefault();
        this.hoverOver(position);
        this.drop();
      });
      cell.addEventListener("dragend", () => this.cancelDrag());
      this.root.appendChild(cell);
    });
  }
}
