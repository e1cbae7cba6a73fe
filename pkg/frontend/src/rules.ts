import type { IssuerRuleDraft } from "./types.js";

export const RELATION_KINDS = [
  "predicate-equivalence",
  "predicate-specialization",
  "class-equivalence",
  "class-specialization",
  "entity-identity",
] as const;

// Mirrors the server's check: absolute means the IRI carries a scheme.
const ABSOLUTE_IRI = /^[A-Za-z][A-Za-z0-9+.-]*:\S*$/;

export function isAbsoluteIri(value: string): boolean {
  return ABSOLUTE_IRI.test(value);
}

// A row the user has not started filling in; skipped everywhere.
export function isBlankDraft(draft: IssuerRuleDraft): boolean {
  return draft.subject.trim() === "" && draft.object.trim() === "";
}

export function activeDrafts(drafts: IssuerRuleDraft[]): IssuerRuleDraft[] {
  return drafts.filter((draft) => !isBlankDraft(draft));
}

export interface DraftIssue {
  index: number;
  field: "subject" | "relation" | "object";
  message: string;
}

export function validateDrafts(drafts: IssuerRuleDraft[]): DraftIssue[] {
  const issues: DraftIssue[] = [];
  drafts.forEach((draft, index) => {
    if (isBlankDraft(draft)) {
      return;
    }
    if (!isAbsoluteIri(draft.subject)) {
      issues.push({ index, field: "subject", message: "must be an absolute IRI" });
    }
    if (!(RELATION_KINDS as readonly string[]).includes(draft.relation)) {
      issues.push({ index, field: "relation", message: "unknown relation kind" });
    }
    if (!isAbsoluteIri(draft.object)) {
      issues.push({ index, field: "object", message: "must be an absolute IRI" });
    }
    if (draft.subject !== "" && draft.subject === draft.object) {
      issues.push({ index, field: "object", message: "maps a term to itself" });
    }
  });
  return issues;
}

// The issuerRules request field, or undefined when there is nothing to send
// (an absent field, not an empty array).
export function issuerRulesField(
  drafts: IssuerRuleDraft[],
): IssuerRuleDraft[] | undefined {
  const active = activeDrafts(drafts);
  if (active.length === 0) {
    return undefined;
  }
  return active.map(({ subject, relation, object }) => ({ subject, relation, object }));
}
