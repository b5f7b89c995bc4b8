/** Trajectory recorder view: omniscient grid on the left, the agent's
 * serialized observation on the right, probe planting panel, and a keyboard
 * loop where each keystroke maps to exactly one server call. */

import { ApiError, Client, type Capabilities, type RecordState } from "./api.js";
import { commandForKey, keymapLegend } from "./keymap.js";
import { drawGrid } from "./render.js";
import { toast } from "./toast.js";

export class RecorderView {
  private busy = false; // one in-flight request; optimistic rendering forbidden

  constructor(
    private client: Client,
    private caps: Capabilities,
    private sessionId: string,
    private root: HTMLElement,
  ) {}

  async mount(): Promise<void> {
    this.root.innerHTML = `
      <div class="columns">
        <div class="center">
          <h3>World</h3>
          <canvas id="recorder-grid"></canvas>
          <div id="status-bar"></div>
        </div>
        <div class="center">
          <h3>Observation</h3>
          <pre id="observation" class="observation"></pre>
        </div>
      </div>
      <div id="probe-panel" class="probe-panel" style="display:none">
        <h3>Plant probe</h3>
        <label>type <select id="probe-type"></select></label>
        <label>question <input id="probe-question" type="text"></label>
        <label>ground truth (blank = recompute on replay)
          <input id="probe-truth" type="text"></label>
        <button id="probe-submit">Plant</button>
        <button id="probe-cancel">Cancel</button>
      </div>
      <div id="keymap-line" class="keymap"></div>
      <button id="save-btn">Save trajectory</button>
      <pre id="save-out" class="export-out"></pre>`;
    const typeSelect = document.getElementById("probe-type") as HTMLSelectElement;
    for (const probeType of this.caps.probe_types) {
      const opt = document.createElement("option");
      opt.value = probeType;
      opt.textContent = probeType;
      typeSelect.appendChild(opt);
    }
    (document.getElementById("keymap-line") as HTMLElement).textContent = keymapLegend();
    document.addEventListener("keydown", (ev) => {
      void this.onKey(ev);
    });
    (document.getElementById("probe-submit") as HTMLElement).addEventListener("click", () => {
      void this.submitProbe();
    });
    (document.getElementById("probe-cancel") as HTMLElement).addEventListener("click", () => {
      this.probePanel().style.display = "none";
    });
    (document.getElementById("save-btn") as HTMLElement).addEventListener("click", () => {
      void this.saveTrajectory();
    });
    await this.refresh();
  }

  private probePanel(): HTMLElement {
    return document.getElementById("probe-panel") as HTMLElement;
  }

  private async onKey(ev: KeyboardEvent): Promise<void> {
    if ((ev.target as HTMLElement | null)?.tagName === "INPUT") return;
    const command = commandForKey(ev.key, this.caps.actions);
    if (command === null || this.busy) return;
    ev.preventDefault();
    if (command.kind === "probe-panel") {
      this.probePanel().style.display = "block";
      (document.getElementById("probe-question") as HTMLInputElement).focus();
      return;
    }
    this.busy = true;
    try {
      if (command.kind === "undo") {
        const { notice } = await this.client.undo(this.sessionId);
        toast(notice, false);
      } else {
        await this.client.step(this.sessionId, command.action);
      }
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  private async submitProbe(): Promise<void> {
    const probeType = (document.getElementById("probe-type") as HTMLSelectElement).value;
    const question = (document.getElementById("probe-question") as HTMLInputElement).value;
    const truthRaw = (document.getElementById("probe-truth") as HTMLInputElement).value;
    try {
      await this.client.plantProbe(
        this.sessionId,
        probeType,
        question,
        truthRaw === "" ? null : truthRaw,
      );
      this.probePanel().style.display = "none";
      toast("probe planted", false);
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    }
    await this.refresh();
  }

  private async saveTrajectory(): Promise<void> {
    try {
      const { trajectory_json } = await this.client.saveTrajectory(this.sessionId);
      (document.getElementById("save-out") as HTMLElement).textContent = trajectory_json;
      toast("trajectory saved", false);
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const state = await this.client.getState(this.sessionId);
    if (state.mode !== "record") throw new Error("recorder view needs a record session");
    this.renderState(state);
  }

  private renderState(state: RecordState): void {
    drawGrid(document.getElementById("recorder-grid") as HTMLCanvasElement, state.grid);
    (document.getElementById("observation") as HTMLElement).textContent = state.observation;
    (document.getElementById("status-bar") as HTMLElement).textContent =
      `${state.level_id}  segment ${state.segment} step ${state.step}  ` +
      `facing ${state.facing}  holding ${state.inventory ?? "nothing"}  ` +
      `probes ${state.probes_planted}  |  ${state.last_event}`;
  }
}
