/** Typed HTTP client for the editor/recorder service.
 *
 * The UI never mutates state locally: every change goes through one of these
 * calls and the panels re-render from the next `getState` poll.
 */

export interface Capabilities {
  /** 1-char kind code -> kind name (e.g. "K" -> "key") */
  kinds: Record<string, string>;
  /** 1-char color code -> color name (e.g. "r" -> "red") */
  colors: Record<string, string>;
  overlays: string[];
  probe_types: string[];
  /** action name -> integer action id */
  actions: Record<string, number>;
  directions: string[];
}

export interface EditState {
  mode: "edit";
  dirty: boolean;
  width: number;
  height: number;
  grid: string[][];
  meta: {
    id: string;
    agent_dir: string;
    agent_start: [number, number];
    view_size: [number, number];
    see_through_walls: boolean;
    max_steps: number;
    soak_duration: number;
  };
}

export interface RecordState {
  mode: "record";
  dirty: boolean;
  grid: string[][];
  observation: string;
  step_count: number;
  segment: number;
  step: number;
  facing: string;
  inventory: string | null;
  level_id: string;
  probes_planted: number;
  last_event: string;
}

export type SessionState = EditState | RecordState;

export interface CreateSessionRequest {
  mode: "edit" | "record";
  level_text?: string;
  width?: number;
  height?: number;
  seed?: number;
  base_dir?: string;
  level_file?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseDetail(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return resp.statusText;
  }
}

export class Client {
  constructor(public baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) throw new ApiError(resp.status, await parseDetail(resp));
    return (await resp.json()) as T;
  }

  capabilities(): Promise<Capabilities> {
    return this.request("GET", "/capabilities");
  }

  createSession(req: CreateSessionRequest): Promise<{ session_id: string; mode: string }> {
    return this.request("POST", "/sessions", req);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  place(
    sessionId: string,
    col: number,
    row: number,
    code: string,
    params: Record<string, unknown> = {},
  ): Promise<{ ok: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/place`, { col, row, code, params });
  }

  setMeta(sessionId: string, key: string, value: string): Promise<{ ok: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/meta`, { key, value });
  }

  exportLevel(sessionId: string): Promise<{ level_text: string }> {
    return this.request("GET", `/sessions/${sessionId}/export`);
  }

  step(sessionId: string, action: number): Promise<{ ok: boolean; event: string }> {
    return this.request("POST", `/sessions/${sessionId}/step`, { action });
  }

  undo(sessionId: string): Promise<{ ok: boolean; notice: string }> {
    return this.request("POST", `/sessions/${sessionId}/undo`, {});
  }

  plantProbe(
    sessionId: string,
    probeType: string,
    question: string,
    groundTruth: unknown = null,
    metadata: Record<string, unknown> = {},
  ): Promise<{ ok: boolean; segment: number; step: number }> {
    return this.request("POST", `/sessions/${sessionId}/probe`, {
      probe_type: probeType,
      question,
      ground_truth: groundTruth,
      metadata,
    });
  }

  saveTrajectory(sessionId: string): Promise<{ trajectory_json: string }> {
    return this.request("GET", `/sessions/${sessionId}/trajectory`);
  }
}
