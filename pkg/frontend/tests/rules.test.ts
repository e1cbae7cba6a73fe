import { expect, it } from "vitest";
import {
  RELATION_KINDS,
  isAbsoluteIri,
  isBlankDraft,
  issuerRulesField,
  validateDrafts,
} from "../src/rules.js";

const VALID = {
  subject: "http://voc.ex/handle",
  relation: "predicate-equivalence",
  object: "http://voc.ex/name",
};

it("accepts absolute IRIs and rejects relative or spaced ones", () => {
  expect(isAbsoluteIri("http://a.ex/x")).toBe(true);
  expect(isAbsoluteIri("urn:uuid:123")).toBe(true);
  expect(isAbsoluteIri("/relative/path")).toBe(false);
  expect(isAbsoluteIri("no-scheme")).toBe(false);
  expect(isAbsoluteIri("http://a.ex/with space")).toBe(false);
  expect(isAbsoluteIri("")).toBe(false);
});

it("passes a valid draft", () => {
  expect(validateDrafts([VALID])).toEqual([]);
});

it("flags each invalid field with its index", () => {
  const issues = validateDrafts([
    VALID,
    { subject: "relative", relation: "bogus", object: "also relative" },
  ]);
  expect(issues.map((i) => [i.index, i.field])).toEqual([
    [1, "subject"],
    [1, "relation"],
    [1, "object"],
  ]);
});

it("rejects a draft that maps a term to itself", () => {
  const issues = validateDrafts([{ ...VALID, object: VALID.subject }]);
  expect(issues).toEqual([
    { index: 0, field: "object", message: "maps a term to itself" },
  ]);
});

it("skips blank rows during validation", () => {
  const blank = { subject: "", relation: "predicate-equivalence", object: "" };
  expect(isBlankDraft(blank)).toBe(true);
  expect(validateDrafts([blank, VALID])).toEqual([]);
});

it("omits the issuerRules field when there is nothing to send", () => {
  const blank = { subject: "", relation: "predicate-equivalence", object: "" };
  expect(issuerRulesField([])).toBeUndefined();
  expect(issuerRulesField([blank])).toBeUndefined();
});

it("serializes filled drafts verbatim", () => {
  const blank = { subject: "", relation: "entity-identity", object: "" };
  expect(issuerRulesField([blank, VALID])).toEqual([VALID]);
});

it("knows all five relation kinds", () => {
  expect(RELATION_KINDS).toHaveLength(5);
  for (const kind of RELATION_KINDS) {
    expect(validateDrafts([{ ...VALID, relation: kind }])).toEqual([]);
  }
});
