/** Pure keystroke-to-command mapping for the recorder view.
 *
 * Each keystroke maps to exactly one server call: WASD move/turn (S waits),
 * G/F pick/drop, T toggle, Z undo, P opens the probe panel. Action ids come
 * from the server's capabilities, never from constants baked into the UI.
 */

export type KeyCommand =
  | { kind: "action"; name: string; action: number }
  | { kind: "undo" }
  | { kind: "probe-panel" };

const ACTION_KEYS: Record<string, string> = {
  w: "forward",
  a: "turn_left",
  d: "turn_right",
  s: "wait",
  g: "pickup",
  f: "drop",
  t: "toggle",
};

export function commandForKey(
  key: string,
  actions: Record<string, number>,
): KeyCommand | null {
  const k = key.toLowerCase();
  if (k === "z") return { kind: "undo" };
  if (k === "p") return { kind: "probe-panel" };
  const name = ACTION_KEYS[k];
  if (name === undefined || !(name in actions)) return null;
  return { kind: "action", name, action: actions[name] };
}

/** One-line legend for the status bar, derived from the same table. */
export function keymapLegend(): string {
  const moves = Object.entries(ACTION_KEYS)
    .map(([key, name]) => `${key.toUpperCase()}=${name.replace("_", " ")}`)
    .join("  ");
  return `${moves}  Z=undo  P=plant probe`;
}
