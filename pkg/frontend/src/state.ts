import { activeDrafts, issuerRulesField, validateDrafts } from "./rules.js";
import type {
  ExecutionRequest,
  IssuerRuleDraft,
  NamedQuery,
  NetworkInfo,
  RejectionJson,
  ResultTableJson,
  RuleSetJson,
  ServerEvent,
} from "./types.js";

export interface RuleCard extends RuleSetJson {
  status: "accepted";
}

export interface RejectionCard extends RejectionJson {
  status: "rejected";
}

export interface RunSummary {
  executionId: string;
  network: string;
  queryLabel: string;
  alignment: "on" | "off";
  rowCount: number;
  totalDurationMs: number;
  documentsFetched: number;
  ruleCards: RuleCard[];
  rejectionCards: RejectionCard[];
}

export interface UiState {
  networks: NetworkInfo[];
  queries: NamedQuery[];
  network: string;
  queryMode: "named" | "custom";
  queryName: string;
  customText: string;
  alignment: "on" | "off";
  drafts: IssuerRuleDraft[];
  streaming: boolean;
  executionId: string | null;
  // Selections snapshot taken when the run started, so the summary is
  // immune to control changes made while the stream is live.
  pendingRun: { network: string; queryLabel: string; alignment: "on" | "off" } | null;
  eventLog: ServerEvent[];
  documentsFetched: number;
  ruleCards: RuleCard[];
  rejectionCards: RejectionCard[];
  results: ResultTableJson | null;
  totalDurationMs: number | null;
  inlineError: { message: string; position?: number } | null;
  runs: RunSummary[];
}

export function emptyDraft(): IssuerRuleDraft {
  return { subject: "", relation: "predicate-equivalence", object: "" };
}

export function initialState(): UiState {
  return {
    networks: [],
    queries: [],
    network: "",
    queryMode: "named",
    queryName: "",
    customText: "",
    alignment: "on",
    drafts: [emptyDraft()],
    streaming: false,
    executionId: null,
    pendingRun: null,
    eventLog: [],
    documentsFetched: 0,
    ruleCards: [],
    rejectionCards: [],
    results: null,
    totalDurationMs: null,
    inlineError: null,
    runs: [],
  };
}

export type Action =
  | { type: "catalogLoaded"; networks: NetworkInfo[]; queries: NamedQuery[] }
  | { type: "networkSelected"; name: string }
  | { type: "querySelected"; name: string }
  | { type: "customQuerySelected" }
  | { type: "customQueryEdited"; text: string }
  | { type: "alignmentToggled"; alignment: "on" | "off" }
  | { type: "draftsEdited"; drafts: IssuerRuleDraft[] }
  | { type: "runStarted"; id: string }
  | { type: "runRejected"; message: string; position?: number }
  | { type: "serverEvent"; event: ServerEvent };

export function queryTextOf(state: UiState): string {
  if (state.queryMode === "custom") {
    return state.customText;
  }
  const named = state.queries.find((q) => q.name === state.queryName);
  return named?.texts[state.network] ?? "";
}

// The run button stays disabled while an execution is streaming, while the
// query text is empty, and while any filled-in issuer draft fails validation.
export function canRun(state: UiState): boolean {
  if (state.streaming) {
    return false;
  }
  if (queryTextOf(state).trim() === "") {
    return false;
  }
  return validateDrafts(state.drafts).length === 0;
}

export function buildRequest(state: UiState): ExecutionRequest {
  const request: ExecutionRequest = {
    network: state.network,
    alignment: state.alignment,
  };
  if (state.queryMode === "named") {
    request.queryName = state.queryName;
  } else {
    request.queryText = state.customText;
  }
  const issuerRules = issuerRulesField(state.drafts);
  if (issuerRules !== undefined) {
    request.issuerRules = issuerRules;
  }
  return request;
}

export function lastTwoRuns(state: UiState): RunSummary[] {
  return state.runs.slice(-2);
}

function queryLabelOf(state: UiState): string {
  return state.queryMode === "named" ? state.queryName : "custom query";
}

export function reduce(state: UiState, action: Action): UiState {
  switch (action.type) {
    case "catalogLoaded":
      return {
        ...state,
        networks: action.networks,
        queries: action.queries,
        network: state.network || action.networks[0]?.name || "",
        queryName: state.queryName || action.queries[0]?.name || "",
      };
    case "networkSelected":
      return { ...state, network: action.name };
    case "querySelected":
      return { ...state, queryMode: "named", queryName: action.name };
    case "customQuerySelected":
      return { ...state, queryMode: "custom" };
    case "customQueryEdited":
      return { ...state, queryMode: "custom", customText: action.text };
    case "alignmentToggled":
      return { ...state, alignment: action.alignment };
    case "draftsEdited":
      return { ...state, drafts: action.drafts };
    case "runStarted":
      return {
        ...state,
        streaming: true,
        executionId: action.id,
        pendingRun: {
          network: state.network,
          queryLabel: queryLabelOf(state),
          alignment: state.alignment,
        },
        eventLog: [],
        documentsFetched: 0,
        ruleCards: [],
        rejectionCards: [],
        results: null,
        totalDurationMs: null,
        inlineError: null,
      };
    case "runRejected":
      // The request never became an execution: no run entry is added.
      return {
        ...state,
        streaming: false,
        inlineError: { message: action.message, position: action.position },
      };
    case "serverEvent":
      return applyServerEvent(state, action.event);
  }
}

function applyServerEvent(state: UiState, event: ServerEvent): UiState {
  const eventLog = [...state.eventLog, event];
  switch (event.kind) {
    case "documentFetched":
      return { ...state, eventLog, documentsFetched: state.documentsFetched + 1 };
    case "ruleSetDiscovered":
      return {
        ...state,
        eventLog,
        ruleCards: [...state.ruleCards, { ...event.payload, status: "accepted" }],
      };
    case "ruleRejected":
      return {
        ...state,
        eventLog,
        rejectionCards: [...state.rejectionCards, { ...event.payload, status: "rejected" }],
      };
    case "resultTable":
      // Rendered verbatim; the table is exactly this payload.
      return { ...state, eventLog, results: event.payload };
    case "done": {
      const report = event.payload.report;
      const run = state.pendingRun ?? {
        network: state.network,
        queryLabel: queryLabelOf(state),
        alignment: state.alignment,
      };
      const summary: RunSummary = {
        executionId: event.payload.id,
        network: run.network,
        queryLabel: run.queryLabel,
        alignment: run.alignment,
        rowCount: report.results.results.bindings.length,
        totalDurationMs: report.totalDurationMs,
        documentsFetched: report.documentsFetched.length,
        ruleCards: state.ruleCards,
        rejectionCards: state.rejectionCards,
      };
      // Replaying the same execution replaces its entry instead of
      // appending, so a reconnect converges on the same history.
      const previous = state.runs[state.runs.length - 1];
      const runs =
        previous !== undefined && previous.executionId === summary.executionId
          ? [...state.runs.slice(0, -1), summary]
          : [...state.runs, summary];
      return {
        ...state,
        eventLog,
        streaming: false,
        pendingRun: null,
        totalDurationMs: report.totalDurationMs,
        runs,
      };
    }
    case "error":
      return {
        ...state,
        eventLog,
        streaming: false,
        pendingRun: null,
        inlineError: { message: event.payload.message },
      };
    default:
      // Unknown event kinds are logged and otherwise ignored.
      return { ...state, eventLog };
  }
}

export { activeDrafts, validateDrafts };
