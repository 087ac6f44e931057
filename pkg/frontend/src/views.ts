/**
 * HTML renderers: pure functions from state and results to markup strings.
 * No DOM access here, so every view can be checked as a string transform.
 *
 * Interactive elements carry data-action attributes; the app wires them up
 * with one delegated listener. Views never reorder or filter answers except
 * in the file table's explicit column sort.
 */

import type { ResultView } from "./api.js";
import { EXCLUDED_CAP, type ExplorationState } from "./state.js";
import type { Shown } from "./controller.js";

export interface FileSort {
  column: 0 | 1 | 2;
  ascending: boolean;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderMeta(result: ResultView): string {
  const ms = (result.elapsed * 1000).toFixed(2);
  const cached = result.cached
    ? '<span class="badge cached">cached</span>'
    : '<span class="badge">fresh</span>';
  const truncated = result.truncated ? ' <span class="badge warn">truncated</span>' : "";
  return `<div class="meta">${result.count} answers in ${ms} ms at v${result.version} ${cached}${truncated}</div>`;
}

/** One answer per line, wire order, each clickable with the given action. */
export function renderAnswerList(result: ResultView, action: string): string {
  if (result.answers.length === 0) {
    return `${renderMeta(result)}<p class="empty">no answers</p>`;
  }
  const items = result.answers
    .map(
      (name) =>
        `<li><button type="button" data-action="${action}" data-name="${escapeHtml(name)}">${escapeHtml(name)}</button></li>`,
    )
    .join("");
  return `${renderMeta(result)}<ul class="answers">${items}</ul>`;
}

/** Split "caller callee file" triples; the file part may itself contain spaces. */
export function fileRows(result: ResultView): [string, string, string][] {
  return result.answers.map((answer) => {
    const [caller = "", callee = "", ...rest] = answer.split(" ");
    return [caller, callee, rest.join(" ")];
  });
}

export function sortedFileRows(
  result: ResultView,
  sort: FileSort | null,
): [string, string, string][] {
  const rows = fileRows(result);
  if (sort === null) return rows;
  const flip = sort.ascending ? 1 : -1;
  return rows
    .map((row, index) => ({ row, index }))
    .sort((a, b) => {
      const order = a.row[sort.column].localeCompare(b.row[sort.column]);
      return order !== 0 ? order * flip : a.index - b.index;
    })
    .map((entry) => entry.row);
}

export function renderFileTable(result: ResultView, sort: FileSort | null): string {
  if (result.answers.length === 0) {
    return `${renderMeta(result)}<p class="empty">no edges</p>`;
  }
  const labels = ["caller", "callee", "file"];
  const header = labels
    .map((label, column) => {
      const arrow =
        sort !== null && sort.column === column ? (sort.ascending ? " ▴" : " ▾") : "";
      return `<th data-action="sort" data-column="${column}">${label}${arrow}</th>`;
    })
    .join("");
  const body = sortedFileRows(result, sort)
    .map(
      ([caller, callee, file]) =>
        `<tr data-action="row" data-callee="${escapeHtml(callee)}">` +
        `<td>${escapeHtml(caller)}</td><td>${escapeHtml(callee)}</td><td>${escapeHtml(file)}</td></tr>`,
    )
    .join("");
  return (
    `${renderMeta(result)}<table class="edges">` +
    `<thead><tr>${header}</tr></thead><tbody>${body}</tbody></table>`
  );
}

function renderFocusForm(state: ExplorationState): string {
  return (
    '<form data-form="focus">' +
    `<input name="focus" value="${escapeHtml(state.focus)}" placeholder="function name" autocomplete="off">` +
    '<button type="submit">query</button>' +
    "</form>"
  );
}

export function renderExplore(state: ExplorationState, shown: Shown): string {
  const callers = state.direction === "callers";
  const controls =
    renderFocusForm(state) +
    '<div class="toggles">' +
    `<label><input type="radio" name="direction" value="callers" data-field="direction"${callers ? " checked" : ""}> callers</label>` +
    `<label><input type="radio" name="direction" value="callees" data-field="direction"${callers ? "" : " checked"}> callees</label>` +
    `<label><input type="checkbox" data-field="transitive"${state.transitive ? " checked" : ""}> transitive</label>` +
    "</div>";
  const list = shown.result === null ? "" : renderAnswerList(shown.result, "focus");
  return `<section class="pane">${controls}${list}</section>`;
}

export function renderCutoff(state: ExplorationState, shown: Shown): string {
  const filter = state.cutoffMode === "filter";
  const chips =
    state.excluded.length === 0
      ? '<span class="hint">click answers below to exclude them</span>'
      : state.excluded
          .map(
            (name) =>
              `<span class="chip">${escapeHtml(name)}<button type="button" data-action="unexclude" data-name="${escapeHtml(name)}" title="remove">&times;</button></span>`,
          )
          .join("");
  const capNote =
    state.excluded.length >= EXCLUDED_CAP
      ? `<span class="hint warn">excluded set is at its cap of ${EXCLUDED_CAP}</span>`
      : "";
  const controls =
    renderFocusForm(state) +
    '<div class="toggles">' +
    `<label><input type="radio" name="cutoff-mode" value="filter" data-field="mode"${filter ? " checked" : ""}> filter</label>` +
    `<label><input type="radio" name="cutoff-mode" value="barrier" data-field="mode"${filter ? "" : " checked"}> barrier</label>` +
    "</div>" +
    `<div class="chips">${chips}${capNote}</div>`;
  const list = shown.result === null ? "" : renderAnswerList(shown.result, "exclude");
  return `<section class="pane">${controls}${list}</section>`;
}

export function renderFilePane(
  state: ExplorationState,
  shown: Shown,
  sort: FileSort | null,
): string {
  const form =
    '<form data-form="file">' +
    `<input name="file" value="${escapeHtml(state.file)}" placeholder="file name" autocomplete="off">` +
    '<button type="submit">browse</button>' +
    "</form>";
  const table = shown.result === null ? "" : renderFileTable(shown.result, sort);
  return `<section class="pane">${form}${table}</section>`;
}

export function renderError(message: string): string {
  if (message === "") return "";
  return `<div class="banner">server error: ${escapeHtml(message)}</div>`;
}

const PANE_LABELS: [ExplorationState["pane"], string][] = [
  ["explore", "explore"],
  ["cutoff", "cut-off"],
  ["file", "files"],
];

export function renderApp(
  state: ExplorationState,
  shown: Shown,
  sort: FileSort | null,
): string {
  const tabs = PANE_LABELS.map(
    ([pane, label]) =>
      `<button type="button" data-action="pane" data-pane="${pane}"${pane === state.pane ? ' class="active"' : ""}>${label}</button>`,
  ).join("");
  const server =
    '<form data-form="server">' +
    `<input name="server" value="${escapeHtml(state.server)}" size="28" autocomplete="off">` +
    "</form>";
  let pane: string;
  if (state.pane === "explore") {
    pane = renderExplore(state, shown);
  } else if (state.pane === "cutoff") {
    pane = renderCutoff(state, shown);
  } else {
    pane = renderFilePane(state, shown, sort);
  }
  return `<nav>${tabs}${server}</nav>${renderError(shown.error)}${pane}`;
}
