/**
 * Client for the query server's plain-text wire format.
 *
 * Every response is one header line
 *
 *   kind count elapsed version cached [truncated]
 *
 * followed by one answer per line. Raw bodies are kept verbatim in a request
 * log so any displayed list can be traced back to the exact bytes it came
 * from; the UI never derives answers any other way.
 */

import type { ExplorationState } from "./state.js";

export interface ResultView {
  kind: string;
  count: number;
  elapsed: number;
  version: number;
  cached: boolean;
  truncated: boolean;
  answers: string[];
}

export interface LogEntry {
  path: string;
  status: number;
  body: string;
}

/** Oldest log entries are dropped past this point. */
export const LOG_CAP = 500;

export class QueryServiceError extends Error {}

export function parseStructured(body: string): ResultView {
  const text = body.endsWith("\n") ? body.slice(0, -1) : body;
  const lines = text.split("\n");
  const head = (lines[0] ?? "").split(" ");
  if (head.length < 5 || head.length > 6) {
    throw new QueryServiceError(`malformed response header: ${lines[0]}`);
  }
  const count = Number(head[1]);
  const elapsed = Number(head[2]);
  const version = Number(head[3]);
  if (!Number.isFinite(count) || !Number.isFinite(elapsed) || !Number.isFinite(version)) {
    throw new QueryServiceError(`malformed response header: ${lines[0]}`);
  }
  if (head[4] !== "true" && head[4] !== "false") {
    throw new QueryServiceError(`malformed response header: ${lines[0]}`);
  }
  if (head.length === 6 && head[5] !== "truncated") {
    throw new QueryServiceError(`malformed response header: ${lines[0]}`);
  }
  return {
    kind: head[0] ?? "",
    count,
    elapsed,
    version,
    cached: head[4] === "true",
    truncated: head.length === 6,
    answers: lines.slice(1),
  };
}

/** Path for the explore pane: closure endpoints when transitive, one-hop otherwise. */
export function explorePath(state: ExplorationState): string {
  const fn = encodeURIComponent(state.focus);
  if (state.direction === "callers") {
    return state.transitive ? `/query/dest?fn=${fn}` : `/query/callers?fn=${fn}`;
  }
  return state.transitive ? `/query/source?fn=${fn}` : `/query/callees?fn=${fn}`;
}

export function cutoffPath(state: ExplorationState): string {
  const parts = [`fn=${encodeURIComponent(state.focus)}`];
  if (state.excluded.length > 0) {
    parts.push(`excluded=${encodeURIComponent(state.excluded.join(","))}`);
  }
  parts.push(`mode=${state.cutoffMode}`);
  return `/query/cutoff?${parts.join("&")}`;
}

export function filePath(state: ExplorationState): string {
  return `/query/file?file=${encodeURIComponent(state.file)}`;
}

/** The single query the current pane is showing. */
export function pathFor(state: ExplorationState): string {
  switch (state.pane) {
    case "explore":
      return explorePath(state);
    case "cutoff":
      return cutoffPath(state);
    case "file":
      return filePath(state);
  }
}

export interface QueryReply {
  raw: string;
  result: ResultView;
}

export type RunQuery = (path: string) => Promise<QueryReply>;

/**
 * Build a runner that fetches from `server()` and appends every exchange to
 * `log`. Server errors carry the body's `error field: message` text.
 */
export function fetchRunner(server: () => string, log: LogEntry[]): RunQuery {
  return async (path: string): Promise<QueryReply> => {
    const response = await fetch(server() + path);
    const body = await response.text();
    log.push({ path, status: response.status, body });
    if (log.length > LOG_CAP) log.shift();
    if (!response.ok) {
      throw new QueryServiceError(body.trim() || `server returned ${response.status}`);
    }
    return { raw: body, result: parseStructured(body) };
  };
}
