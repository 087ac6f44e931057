/**
 * Browser entry point: one delegated listener per event type wires the DOM
 * to the controller, and every state change lands in the URL so the current
 * view can be shared or restored with a plain link.
 */

import { fetchRunner, type LogEntry } from "./api.js";
import { Explorer } from "./controller.js";
import {
  decodeState,
  encodeState,
  type CutoffMode,
  type Direction,
  type Pane,
} from "./state.js";
import { renderApp, type FileSort } from "./views.js";

export function start(root: HTMLElement): Explorer {
  const log: LogEntry[] = [];
  let sort: FileSort | null = null;
  let booted = false;

  const explorer: Explorer = new Explorer(
    decodeState(window.location.search),
    fetchRunner(() => explorer.state.server, log),
    () => {
      syncUrl();
      paint();
    },
  );
  // kept reachable from the console for poking at raw responses
  (window as unknown as Record<string, unknown>).calldepLog = log;

  function paint(): void {
    root.innerHTML = renderApp(explorer.state, explorer.shown, sort);
  }

  function syncUrl(): void {
    const query = encodeState(explorer.state);
    if (query === window.location.search.replace(/^\?/, "")) return;
    const target = query === "" ? window.location.pathname : `?${query}`;
    if (booted) {
      window.history.pushState(null, "", target);
    } else {
      window.history.replaceState(null, "", target);
      booted = true;
    }
  }

  root.addEventListener("click", (event) => {
    const element = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (element === null) return;
    const name = element.dataset.name ?? "";
    switch (element.dataset.action) {
      case "pane":
        void explorer.setPane(element.dataset.pane as Pane);
        break;
      case "focus":
        void explorer.searchAndFocus(name);
        break;
      case "exclude":
        void explorer.exclude(name);
        break;
      case "unexclude":
        void explorer.unexclude(name);
        break;
      case "row":
        void explorer.focusFromRow(element.dataset.callee ?? "");
        break;
      case "sort": {
        // asc -> desc -> off; a sort never re-queries, it reorders in place
        const column = Number(element.dataset.column) as 0 | 1 | 2;
        if (sort === null || sort.column !== column) {
          sort = { column, ascending: true };
        } else if (sort.ascending) {
          sort = { column, ascending: false };
        } else {
          sort = null;
        }
        paint();
        break;
      }
    }
  });

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const value = (name: string): string =>
      (form.elements.namedItem(name) as HTMLInputElement).value.trim();
    switch (form.dataset.form) {
      case "focus":
        void explorer.searchAndFocus(value("focus"));
        break;
      case "file":
        sort = null;
        void explorer.browseFile(value("file"));
        break;
      case "server":
        void explorer.setServer(value("server"));
        break;
    }
  });

  root.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    switch (input.dataset.field) {
      case "direction":
        void explorer.setDirection(input.value as Direction);
        break;
      case "transitive":
        void explorer.setTransitive(input.checked);
        break;
      case "mode":
        void explorer.setCutoffMode(input.value as CutoffMode);
        break;
    }
  });

  window.addEventListener("popstate", () => {
    explorer.state = decodeState(window.location.search);
    sort = null;
    void explorer.refresh();
  });

  void explorer.refresh();
  return explorer;
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root !== null) start(root);
}
