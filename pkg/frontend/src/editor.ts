/** Level editor view: grid canvas, capability-derived palette, property
 * inspector, and export. All mutations go to the server; the grid re-renders
 * from the next state fetch. */

import { ApiError, Client, type Capabilities, type EditState } from "./api.js";
import { buildPalette, type PaletteEntry } from "./palette.js";
import { cellAt, drawGrid } from "./render.js";
import { toast } from "./toast.js";

export class EditorView {
  private selected: PaletteEntry | null = null;
  private state: EditState | null = null;

  constructor(
    private client: Client,
    private caps: Capabilities,
    private sessionId: string,
    private root: HTMLElement,
  ) {}

  async mount(): Promise<void> {
    this.root.innerHTML = `
      <div class="columns">
        <div id="palette" class="sidebar"></div>
        <div class="center">
          <canvas id="editor-grid"></canvas>
          <div id="meta-bar"></div>
          <button id="export-btn">Export level</button>
          <pre id="export-out" class="export-out"></pre>
        </div>
        <div id="inspector" class="sidebar"></div>
      </div>`;
    this.renderPalette();
    const canvas = this.canvas();
    canvas.addEventListener("click", (ev) => {
      void this.onCanvasClick(ev.offsetX, ev.offsetY);
    });
    const exportBtn = document.getElementById("export-btn") as HTMLButtonElement;
    exportBtn.addEventListener("click", () => {
      void this.onExport();
    });
    await this.refresh();
  }

  private canvas(): HTMLCanvasElement {
    return document.getElementById("editor-grid") as HTMLCanvasElement;
  }

  private renderPalette(): void {
    const palette = document.getElementById("palette") as HTMLElement;
    palette.innerHTML = "<h3>Palette</h3>";
    let group = "";
    for (const entry of buildPalette(this.caps)) {
      if (entry.group !== group) {
        group = entry.group;
        const heading = document.createElement("h4");
        heading.textContent = group;
        palette.appendChild(heading);
      }
      const btn = document.createElement("button");
      btn.textContent = entry.label;
      btn.className = "palette-entry";
      btn.addEventListener("click", () => {
        this.selected = entry;
        this.renderInspector(entry);
        for (const other of palette.querySelectorAll(".palette-entry")) {
          other.classList.toggle("selected", other === btn);
        }
      });
      palette.appendChild(btn);
    }
  }

  private renderInspector(entry: PaletteEntry): void {
    const inspector = document.getElementById("inspector") as HTMLElement;
    inspector.innerHTML = `<h3>Inspector</h3><p>${entry.label}</p>`;
    for (const field of entry.params) {
      const label = document.createElement("label");
      label.textContent = field.label + (field.required ? " *" : "");
      let input: HTMLElement;
      if (field.choices !== undefined) {
        const select = document.createElement("select");
        for (const choice of field.choices) {
          const opt = document.createElement("option");
          opt.value = choice;
          opt.textContent = choice;
          opt.selected = choice === field.default;
          select.appendChild(opt);
        }
        input = select;
      } else {
        const text = document.createElement("input");
        text.type = "text";
        text.value = field.default ?? "";
        input = text;
      }
      input.dataset.param = field.name;
      label.appendChild(input);
      inspector.appendChild(label);
    }
  }

  private collectParams(): Record<string, unknown> {
    const params: Record<string, unknown> = {};
    const inspector = document.getElementById("inspector") as HTMLElement;
    for (const el of inspector.querySelectorAll<HTMLInputElement | HTMLSelectElement>(
      "[data-param]",
    )) {
      if (el.value !== "") params[el.dataset.param as string] = el.value;
    }
    return params;
  }

  private async onCanvasClick(x: number, y: number): Promise<void> {
    if (this.state === null || this.selected === null) return;
    const cell = cellAt(this.state.grid, x, y);
    if (cell === null) return;
    try {
      await this.client.place(
        this.sessionId,
        cell.col,
        cell.row,
        this.selected.code,
        this.collectParams(),
      );
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    }
    await this.refresh();
  }

  private async onExport(): Promise<void> {
    try {
      const { level_text } = await this.client.exportLevel(this.sessionId);
      (document.getElementById("export-out") as HTMLElement).textContent = level_text;
      toast("exported", false);
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const state = await this.client.getState(this.sessionId);
    if (state.mode !== "edit") throw new Error("editor view needs an edit session");
    this.state = state;
    drawGrid(this.canvas(), state.grid);
    const meta = document.getElementById("meta-bar") as HTMLElement;
    meta.textContent =
      `${state.meta.id}  ${state.width}x${state.height}  ` +
      `facing ${state.meta.agent_dir}  view ${state.meta.view_size.join("x")}` +
      (state.dirty ? "  (unsaved)" : "");
  }
}
