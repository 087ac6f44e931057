/**
 * Pane logic with no DOM in sight: holds the exploration state, issues one
 * query per change through an injected runner, and keeps only the newest
 * reply (an older in-flight response must never overwrite a newer one).
 */

import { pathFor, type QueryReply, type ResultView, type RunQuery } from "./api.js";
import {
  withExcluded,
  withoutExcluded,
  type CutoffMode,
  type Direction,
  type ExplorationState,
  type Pane,
} from "./state.js";

export interface Shown {
  result: ResultView | null;
  /** Exact response body the answers came from; empty when result is null. */
  raw: string;
  /** Non-empty means the error banner is up; the last result stays visible. */
  error: string;
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

/** Whether the pane has enough input to query at all. */
export function hasSubject(state: ExplorationState): boolean {
  return state.pane === "file" ? state.file !== "" : state.focus !== "";
}

export class Explorer {
  state: ExplorationState;
  shown: Shown = { result: null, raw: "", error: "" };
  private seq = 0;
  private readonly run: RunQuery;
  private readonly render: () => void;

  constructor(state: ExplorationState, run: RunQuery, render: () => void = () => {}) {
    this.state = state;
    this.run = run;
    this.render = render;
  }

  /** Re-issue the current pane's query; stale replies are dropped unseen. */
  async refresh(): Promise<void> {
    const ticket = ++this.seq;
    let outcome: Shown;
    if (!hasSubject(this.state)) {
      outcome = { result: null, raw: "", error: "" };
    } else {
      try {
        const reply: QueryReply = await this.run(pathFor(this.state));
        outcome = { result: reply.result, raw: reply.raw, error: "" };
      } catch (err) {
        // keep state and the previous answers; only raise the banner
        outcome = { ...this.shown, error: describe(err) };
      }
    }
    if (ticket !== this.seq) return;
    this.shown = outcome;
    this.render();
  }

  searchAndFocus(name: string): Promise<void> {
    this.state = { ...this.state, focus: name };
    return this.refresh();
  }

  setPane(pane: Pane): Promise<void> {
    if (pane === this.state.pane) return Promise.resolve();
    this.state = { ...this.state, pane };
    return this.refresh();
  }

  setDirection(direction: Direction): Promise<void> {
    this.state = { ...this.state, direction };
    return this.refresh();
  }

  setTransitive(transitive: boolean): Promise<void> {
    this.state = { ...this.state, transitive };
    return this.refresh();
  }

  setCutoffMode(cutoffMode: CutoffMode): Promise<void> {
    this.state = { ...this.state, cutoffMode };
    return this.refresh();
  }

  /** The what-if loop: answers clicked in the cutoff pane land here. */
  exclude(name: string): Promise<void> {
    const next = withExcluded(this.state, name);
    if (next === this.state) return Promise.resolve();
    this.state = next;
    return this.refresh();
  }

  unexclude(name: string): Promise<void> {
    const next = withoutExcluded(this.state, name);
    if (next === this.state) return Promise.resolve();
    this.state = next;
    return this.refresh();
  }

  browseFile(file: string): Promise<void> {
    this.state = { ...this.state, pane: "file", file };
    return this.refresh();
  }

  setServer(server: string): Promise<void> {
    this.state = { ...this.state, server };
    return this.refresh();
  }

  /** A file-table row click drills into the edge's callee. */
  focusFromRow(callee: string): Promise<void> {
    this.state = { ...this.state, pane: "explore", focus: callee };
    return this.refresh();
  }
}
