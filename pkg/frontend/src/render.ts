import { RELATION_KINDS } from "./rules.js";
import {
  canRun,
  lastTwoRuns,
  queryTextOf,
  validateDrafts,
  type RunSummary,
  type UiState,
} from "./state.js";
import type { ServerEvent, TermJson } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

// Display form of a term: the payload's lexical value plus its own
// language/datatype annotations. Nothing is recomputed.
export function termText(term: TermJson): string {
  if (term.type === "bnode") {
    return `_:${term.value}`;
  }
  if (term.type === "literal") {
    if (term["xml:lang"] !== undefined) {
      return `${term.value} @${term["xml:lang"]}`;
    }
    if (term.datatype !== undefined) {
      const local = term.datatype.split(/[#/]/).pop() ?? term.datatype;
      return `${term.value} (${local})`;
    }
    return term.value;
  }
  return term.value;
}

export function renderResultsTable(state: UiState): string {
  const table = state.results;
  if (table === null) {
    return `<section id="results"><h2>Results</h2><p class="placeholder">No results yet.</p></section>`;
  }
  const vars = table.head.vars;
  const header = vars.map((v) => `<th>${escapeHtml(v)}</th>`).join("");
  const rows = table.results.bindings
    .map((binding) => {
      const cells = vars
        .map((v) => {
          const term = binding[v];
          return `<td>${term === undefined ? "" : escapeHtml(termText(term))}</td>`;
        })
        .join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  return (
    `<section id="results"><h2>Results</h2>` +
    `<table><thead><tr>${header}</tr></thead><tbody>${rows}</tbody></table>` +
    `<p class="row-count">${table.results.bindings.length} rows</p></section>`
  );
}

export function renderStatus(state: UiState): string {
  const parts = [
    state.streaming ? `<span class="badge streaming">streaming</span>` : "",
    `<span id="doc-counter">${state.documentsFetched} documents fetched</span>`,
    state.totalDurationMs !== null
      ? `<span id="duration">${state.totalDurationMs} ms total</span>`
      : "",
  ].filter((p) => p !== "");
  return `<section id="status">${parts.join(" · ")}</section>`;
}

export function renderInlineError(state: UiState): string {
  const error = state.inlineError;
  if (error === null) {
    return "";
  }
  let marker = "";
  if (error.position !== undefined) {
    const text = queryTextOf(state);
    const at = Math.max(0, Math.min(error.position, text.length));
    marker =
      `<pre class="error-context">${escapeHtml(text.slice(0, at))}` +
      `<mark>▸</mark>${escapeHtml(text.slice(at))}</pre>`;
  }
  return (
    `<section id="inline-error" class="error">` +
    `<strong>Error:</strong> ${escapeHtml(error.message)}${marker}</section>`
  );
}

export function renderRuleCards(state: UiState): string {
  const accepted = state.ruleCards
    .map(
      (card) =>
        `<div class="rule-card accepted"><span class="badge ok">accepted</span>` +
        `<code>${escapeHtml(card.location)}</code>` +
        `<p>subweb: ${card.subwebPrefixes.map(escapeHtml).join(", ")}</p>` +
        `<p>${card.acceptedRuleCount} rules</p></div>`,
    )
    .join("");
  const rejected = state.rejectionCards
    .map(
      (card) =>
        `<div class="rule-card rejected"><span class="badge bad">rejected</span>` +
        `<code>${escapeHtml(card.item)}</code>` +
        `<p>reason: ${escapeHtml(card.reason)}</p>` +
        (card.detail !== undefined ? `<p>${escapeHtml(card.detail)}</p>` : "") +
        `</div>`,
    )
    .join("");
  const empty =
    accepted === "" && rejected === "" ? `<p class="placeholder">No rule sets seen.</p>` : "";
  return `<section id="rules"><h2>Alignment rules</h2>${accepted}${rejected}${empty}</section>`;
}

function eventLine(event: ServerEvent): string {
  switch (event.kind) {
    case "documentFetched":
      return `fetched ${event.payload.iri} (${event.payload.tripleCount} triples)`;
    case "ruleSetDiscovered":
      return `rule set ${event.payload.location} accepted (${event.payload.acceptedRuleCount} rules)`;
    case "ruleRejected":
      return `rule rejected: ${event.payload.item} (${event.payload.reason})`;
    case "realigned":
      return `re-aligned ${event.payload.subweb}: ${event.payload.changedCount} triples changed`;
    case "resultTable":
      return `result table: ${event.payload.results.bindings.length} rows`;
    case "done":
      return `done in ${event.payload.report.totalDurationMs} ms (${event.payload.report.terminationCause})`;
    case "error":
      return `error: ${event.payload.message}`;
    default:
      return (event as { kind: string }).kind;
  }
}

export function renderEventLog(state: UiState): string {
  const items = state.eventLog
    .slice(-30)
    .map((event) => `<li>${escapeHtml(eventLine(event))}</li>`)
    .join("");
  return `<section id="event-log"><h2>Events</h2><ol>${items}</ol></section>`;
}

function runPanel(run: RunSummary, title: string): string {
  return (
    `<div class="run-panel"><h3>${escapeHtml(title)}</h3>` +
    `<dl>` +
    `<dt>network</dt><dd>${escapeHtml(run.network)}</dd>` +
    `<dt>query</dt><dd>${escapeHtml(run.queryLabel)}</dd>` +
    `<dt>alignment</dt><dd>${run.alignment}</dd>` +
    `<dt>rows</dt><dd>${run.rowCount}</dd>` +
    `<dt>documents</dt><dd>${run.documentsFetched}</dd>` +
    `<dt>duration</dt><dd>${run.totalDurationMs} ms</dd>` +
    `<dt>rule sets</dt><dd>${run.ruleCards.length} accepted, ${run.rejectionCards.length} rejected</dd>` +
    `</dl></div>`
  );
}

// Side-by-side summaries of the last two runs, so configurations can be
// alternated and compared without any server support.
export function renderComparison(state: UiState): string {
  const runs = lastTwoRuns(state);
  if (runs.length === 0) {
    return `<section id="comparison"><h2>Run comparison</h2><p class="placeholder">No runs yet.</p></section>`;
  }
  const panels =
    runs.length === 1
      ? runPanel(runs[0], "latest")
      : runPanel(runs[0], "previous") + runPanel(runs[1], "latest");
  return `<section id="comparison"><h2>Run comparison</h2><div class="panels">${panels}</div></section>`;
}

function renderDraftRows(state: UiState): string {
  const relationOptions = (selected: string) =>
    RELATION_KINDS.map(
      (kind) =>
        `<option value="${kind}"${kind === selected ? " selected" : ""}>${kind}</option>`,
    ).join("");
  return state.drafts
    .map(
      (draft, index) =>
        `<div class="draft-row">` +
        `<input data-field="subject" data-index="${index}" placeholder="subject IRI" value="${escapeHtml(draft.subject)}">` +
        `<select data-field="relation" data-index="${index}">${relationOptions(draft.relation)}</select>` +
        `<input data-field="object" data-index="${index}" placeholder="object IRI" value="${escapeHtml(draft.object)}">` +
        `<button data-remove="${index}" type="button">×</button>` +
        `</div>`,
    )
    .join("");
}

function renderDraftIssues(state: UiState): string {
  const issues = validateDrafts(state.drafts);
  if (issues.length === 0) {
    return "";
  }
  const items = issues
    .map(
      (issue) =>
        `<li class="draft-issue">rule ${issue.index + 1} ${issue.field}: ${escapeHtml(issue.message)}</li>`,
    )
    .join("");
  return `<ul id="draft-issues">${items}</ul>`;
}

export function renderControls(state: UiState): string {
  const networkOptions = state.networks
    .map(
      (n) =>
        `<option value="${escapeHtml(n.name)}"${n.name === state.network ? " selected" : ""}>` +
        `${escapeHtml(n.name)} (${n.podCount} pods)</option>`,
    )
    .join("");
  const queryOptions =
    state.queries
      .map(
        (q) =>
          `<option value="${escapeHtml(q.name)}"${
            state.queryMode === "named" && q.name === state.queryName ? " selected" : ""
          }>${escapeHtml(q.name)}</option>`,
      )
      .join("") +
    `<option value="__custom__"${state.queryMode === "custom" ? " selected" : ""}>Custom query…</option>`;
  const textarea =
    state.queryMode === "custom"
      ? `<textarea id="query-text" rows="6" placeholder="SELECT ...">${escapeHtml(state.customText)}</textarea>`
      : "";
  return (
    `<section id="controls">` +
    `<label>Network <select id="network">${networkOptions}</select></label>` +
    `<label>Query <select id="query-name">${queryOptions}</select></label>` +
    textarea +
    `<label><input type="checkbox" id="alignment"${state.alignment === "on" ? " checked" : ""}> alignment</label>` +
    `<fieldset id="drafts"><legend>Issuer rules</legend>${renderDraftRows(state)}` +
    `<button id="add-draft" type="button">add rule</button>${renderDraftIssues(state)}</fieldset>` +
    `<button id="run" type="button"${canRun(state) ? "" : " disabled"}>Run</button>` +
    `</section>`
  );
}

export function renderApp(state: UiState): string {
  return (
    `<main>` +
    renderControls(state) +
    renderStatus(state) +
    renderInlineError(state) +
    renderRuleCards(state) +
    renderResultsTable(state) +
    renderComparison(state) +
    renderEventLog(state) +
    `</main>`
  );
}
