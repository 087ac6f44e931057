/**
 * Exploration state and its URL serialization.
 *
 * Everything that changes what the page shows lives in ExplorationState and
 * round-trips through the query string, so any view is shareable as a link
 * and reproducible from one.
 */

export type Pane = "explore" | "cutoff" | "file";
export type Direction = "callers" | "callees";
export type CutoffMode = "filter" | "barrier";

/** Hard cap on the excluded set; larger sets stop being shareable URLs. */
export const EXCLUDED_CAP = 200;

export const DEFAULT_SERVER = "http://127.0.0.1:8377";

export interface ExplorationState {
  pane: Pane;
  focus: string;
  direction: Direction;
  transitive: boolean;
  excluded: string[];
  cutoffMode: CutoffMode;
  file: string;
  server: string;
}

export function defaultState(): ExplorationState {
  return {
    pane: "explore",
    focus: "",
    direction: "callers",
    transitive: true,
    excluded: [],
    cutoffMode: "filter",
    file: "",
    server: DEFAULT_SERVER,
  };
}

/** Add a name to the excluded set; duplicates and entries past the cap are dropped. */
export function withExcluded(state: ExplorationState, name: string): ExplorationState {
  if (name === "" || state.excluded.includes(name)) return state;
  if (state.excluded.length >= EXCLUDED_CAP) return state;
  return { ...state, excluded: [...state.excluded, name] };
}

export function withoutExcluded(state: ExplorationState, name: string): ExplorationState {
  if (!state.excluded.includes(name)) return state;
  return { ...state, excluded: state.excluded.filter((entry) => entry !== name) };
}

/** Serialize to query-string form; fields at their default value are omitted. */
export function encodeState(state: ExplorationState): string {
  const defaults = defaultState();
  const params = new URLSearchParams();
  if (state.pane !== defaults.pane) params.set("pane", state.pane);
  if (state.focus !== "") params.set("focus", state.focus);
  if (state.direction !== defaults.direction) params.set("dir", state.direction);
  if (!state.transitive) params.set("transitive", "0");
  if (state.excluded.length > 0) params.set("excluded", state.excluded.join(","));
  if (state.cutoffMode !== defaults.cutoffMode) params.set("mode", state.cutoffMode);
  if (state.file !== "") params.set("file", state.file);
  if (state.server !== defaults.server) params.set("server", state.server);
  return params.toString();
}

/**
 * Rebuild state from a query string (leading "?" allowed). Unknown parameters
 * and out-of-range values fall back to defaults rather than failing: a stale
 * or hand-edited link should still load.
 */
export function decodeState(search: string): ExplorationState {
  const params = new URLSearchParams(search);
  const state = defaultState();
  const pane = params.get("pane");
  if (pane === "explore" || pane === "cutoff" || pane === "file") state.pane = pane;
  state.focus = params.get("focus") ?? "";
  const dir = params.get("dir");
  if (dir === "callers" || dir === "callees") state.direction = dir;
  state.transitive = params.get("transitive") !== "0";
  const seen = new Set<string>();
  for (const name of (params.get("excluded") ?? "").split(",")) {
    if (name !== "") seen.add(name);
    if (seen.size >= EXCLUDED_CAP) break;
  }
  state.excluded = [...seen];
  const mode = params.get("mode");
  if (mode === "filter" || mode === "barrier") state.cutoffMode = mode;
  state.file = params.get("file") ?? "";
  state.server = params.get("server") ?? state.server;
  return state;
}
