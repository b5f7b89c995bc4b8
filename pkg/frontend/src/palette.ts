/** Editor palette, derived entirely from the server's capabilities so that
 * newly registered object classes show up without any UI change. */

import type { Capabilities } from "./api.js";

export interface PaletteEntry {
  /** Placement code sent to the server: "##", "@.", "erase", a 2-char
   * color+kind code, or an overlay kind name. */
  code: string;
  label: string;
  group: "tools" | "objects" | "overlays";
  /** Extra parameters the inspector must collect before placing. */
  params: ParamField[];
}

export interface ParamField {
  name: string;
  label: string;
  required: boolean;
  /** Free-text default; the inspector renders a select when choices is set. */
  default?: string;
  choices?: string[];
}

export function buildPalette(caps: Capabilities): PaletteEntry[] {
  const entries: PaletteEntry[] = [
    { code: "##", label: "wall", group: "tools", params: [] },
    { code: "@.", label: "agent start", group: "tools", params: [] },
    { code: "erase", label: "erase", group: "tools", params: [] },
  ];
  for (const [colorCode, color] of Object.entries(caps.colors)) {
    for (const [kindCode, kind] of Object.entries(caps.kinds)) {
      entries.push({
        code: colorCode + kindCode,
        label: `${color} ${kind.replace(/_/g, " ")}`,
        group: "objects",
        params: objectParams(kind),
      });
    }
  }
  for (const overlay of caps.overlays) {
    entries.push({
      code: overlay,
      label: overlay,
      group: "overlays",
      params: overlayParams(overlay, caps),
    });
  }
  return entries;
}

function objectParams(kind: string): ParamField[] {
  if (kind === "door") {
    return [
      { name: "id", label: "door id", required: false, default: "" },
      {
        name: "state",
        label: "state",
        required: false,
        default: "closed",
        choices: ["open", "closed", "locked"],
      },
    ];
  }
  if (kind === "notice_board") {
    return [{ name: "text", label: "text", required: true }];
  }
  if (kind === "signpost") {
    return [
      { name: "text", label: "text", required: true },
      { name: "accuracy", label: "stated accuracy (0..1)", required: false },
    ];
  }
  return [];
}

function overlayParams(overlay: string, caps: Capabilities): ParamField[] {
  switch (overlay) {
    case "river":
      return [
        {
          name: "direction",
          label: "direction",
          required: true,
          default: caps.directions[0],
          choices: caps.directions,
        },
        { name: "speed", label: "speed", required: false, default: "1" },
      ];
    case "fire":
      return [{ name: "rise_step", label: "flood arrival step (0 = never)", required: false, default: "0" }];
    case "flood":
      return [{ name: "rise_step", label: "rise step", required: true }];
    case "plate":
      return [
        {
          name: "effect",
          label: "effect",
          required: false,
          default: "continuous",
          choices: ["continuous", "trigger"],
        },
        { name: "link", label: "linked door id", required: true },
      ];
    default:
      return [];
  }
}
