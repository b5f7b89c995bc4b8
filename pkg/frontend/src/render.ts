/** Tile-map construction and canvas rendering for the grid panels.
 *
 * Tiles carry the same 2-char codes used by the level format and the grid
 * serializer, overlaid on a color fill, so operators read one notation
 * everywhere. `tileMap` is pure; `drawGrid` paints it onto a canvas.
 */

export interface Tile {
  code: string;
  fill: string;
  glyph: string;
  glyphColor: string;
}

const OBJECT_COLORS: Record<string, string> = {
  r: "#c0392b",
  b: "#2980b9",
  g: "#27ae60",
  y: "#d4a017",
  p: "#8e44ad",
  e: "#7f8c8d",
};

const OVERLAY_FILLS: Record<string, string> = {
  vv: "#aed6f1", // river
  ff: "#f5b041", // active fire
  ww: "#5dade2", // active flood
  pp: "#d7dbdd", // pressure plate
  dd: "#515a5a", // dark zone
};

export function tileForCode(code: string): Tile {
  if (code === "##") return { code, fill: "#2c3e50", glyph: "##", glyphColor: "#ecf0f1" };
  if (code === "@.") return { code, fill: "#f9e79f", glyph: "@", glyphColor: "#1b2631" };
  if (code === "..") return { code, fill: "#fdfefe", glyph: "", glyphColor: "#aab7b8" };
  if (code === "??") return { code, fill: "#bdc3c7", glyph: "?", glyphColor: "#566573" };
  const overlayFill = OVERLAY_FILLS[code];
  if (overlayFill !== undefined) {
    return { code, fill: overlayFill, glyph: code, glyphColor: "#1b2631" };
  }
  const objectColor = OBJECT_COLORS[code[0]];
  if (objectColor !== undefined) {
    return { code, fill: "#fdfefe", glyph: code, glyphColor: objectColor };
  }
  return { code, fill: "#fadbd8", glyph: code, glyphColor: "#922b21" };
}

export function tileMap(grid: string[][]): Tile[][] {
  return grid.map((row) => row.map(tileForCode));
}

export const TILE_PX = 36;

export function drawGrid(canvas: HTMLCanvasElement, grid: string[][]): void {
  const tiles = tileMap(grid);
  const rows = tiles.length;
  const cols = rows > 0 ? tiles[0].length : 0;
  canvas.width = cols * TILE_PX;
  canvas.height = rows * TILE_PX;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  ctx.font = "bold 13px monospace";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const tile = tiles[r][c];
      const x = c * TILE_PX;
      const y = r * TILE_PX;
      ctx.fillStyle = tile.fill;
      ctx.fillRect(x, y, TILE_PX, TILE_PX);
      ctx.strokeStyle = "#d5d8dc";
      ctx.strokeRect(x + 0.5, y + 0.5, TILE_PX - 1, TILE_PX - 1);
      if (tile.glyph !== "") {
        ctx.fillStyle = tile.glyphColor;
        ctx.fillText(tile.glyph, x + TILE_PX / 2, y + TILE_PX / 2);
      }
    }
  }
}

/** Grid coordinates of a click, or null when outside the tile area. */
export function cellAt(
  grid: string[][],
  offsetX: number,
  offsetY: number,
): { col: number; row: number } | null {
  const col = Math.floor(offsetX / TILE_PX);
  const row = Math.floor(offsetY / TILE_PX);
  if (row < 0 || row >= grid.length || col < 0 || col >= (grid[row]?.length ?? 0)) return null;
  return { col, row };
}
