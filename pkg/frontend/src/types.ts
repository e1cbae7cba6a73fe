// JSON payloads exchanged with the query service. Field names mirror the
// wire format exactly; the UI renders these payloads and computes nothing
// beyond them.

export interface NetworkInfo {
  name: string;
  configuration: string;
  podCount: number;
  documentCount: number;
  podsRoot: string;
}

export interface NamedQuery {
  name: string;
  // Query text per network; hosting rebases in-network IRIs.
  texts: Record<string, string>;
}

export interface TermJson {
  type: "uri" | "literal" | "bnode";
  value: string;
  datatype?: string;
  "xml:lang"?: string;
}

export type BindingRow = Record<string, TermJson>;

export interface ResultTableJson {
  head: { vars: string[] };
  results: { bindings: BindingRow[] };
}

export interface FetchRecordJson {
  iri: string;
  tripleCount: number;
  fetchDurationMs: number;
}

export interface RuleSetJson {
  location: string;
  subwebPrefixes: string[];
  acceptedRuleCount: number;
}

export interface RejectionJson {
  item: string;
  reason: string;
  detail?: string;
}

export interface FetchErrorJson {
  iri: string;
  kind: string;
  detail: string;
}

export interface ReportJson {
  results: ResultTableJson;
  documentsFetched: FetchRecordJson[];
  ruleSetsDiscovered: RuleSetJson[];
  rulesRejected: RejectionJson[];
  fetchErrors: FetchErrorJson[];
  totalDurationMs: number;
  terminationCause: string;
}

export interface ExecutionStatus {
  id: string;
  status: "running" | "done" | "failed";
  report: ReportJson | null;
  error: string | null;
}

export type ServerEvent =
  | { kind: "documentFetched"; payload: FetchRecordJson }
  | { kind: "ruleSetDiscovered"; payload: RuleSetJson }
  | { kind: "ruleRejected"; payload: RejectionJson }
  | { kind: "realigned"; payload: { subweb: string; changedCount: number } }
  | { kind: "resultTable"; payload: ResultTableJson }
  | { kind: "done"; payload: { id: string; report: ReportJson } }
  | { kind: "error"; payload: { id: string; message: string } };

export interface IssuerRuleDraft {
  subject: string;
  relation: string;
  object: string;
}

export interface ExecutionRequest {
  network: string;
  queryName?: string;
  queryText?: string;
  alignment: "on" | "off";
  deterministic?: boolean;
  issuerRules?: IssuerRuleDraft[];
}
