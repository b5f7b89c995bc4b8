/** Entry point: landing screen that starts an editor or recorder session. */

import { ApiError, Client } from "./api.js";
import { EditorView } from "./editor.js";
import { RecorderView } from "./recorder.js";
import { toast } from "./toast.js";

const SERVER = (window as { GRIDPROBE_SERVER?: string }).GRIDPROBE_SERVER ?? "http://127.0.0.1:8722";

async function start(): Promise<void> {
  const client = new Client(SERVER);
  const caps = await client.capabilities();
  const root = document.getElementById("app") as HTMLElement;
  root.innerHTML = `
    <div class="landing">
      <h2>gridworld tools</h2>
      <button id="new-edit">New level (editor)</button>
      <div>
        <textarea id="level-text" rows="8" cols="48"
          placeholder="paste level text to edit or record on"></textarea>
      </div>
      <label>seed <input id="seed" type="number" value="0"></label>
      <button id="open-edit">Edit pasted level</button>
      <button id="open-record">Record on pasted level</button>
    </div>`;

  const levelText = (): string =>
    (document.getElementById("level-text") as HTMLTextAreaElement).value;
  const seed = (): number =>
    Number((document.getElementById("seed") as HTMLInputElement).value) || 0;

  const open = async (mode: "edit" | "record", text?: string): Promise<void> => {
    try {
      const { session_id } = await client.createSession({
        mode,
        level_text: text,
        seed: seed(),
      });
      if (mode === "edit") {
        await new EditorView(client, caps, session_id, root).mount();
      } else {
        await new RecorderView(client, caps, session_id, root).mount();
      }
    } catch (err) {
      toast(err instanceof ApiError ? err.detail : String(err));
    }
  };

  (document.getElementById("new-edit") as HTMLElement).addEventListener("click", () => {
    void open("edit");
  });
  (document.getElementById("open-edit") as HTMLElement).addEventListener("click", () => {
    void open("edit", levelText());
  });
  (document.getElementById("open-record") as HTMLElement).addEventListener("click", () => {
    void open("record", levelText());
  });
}

void start();
