"""End-to-end acceptance checks.

Each test prints exactly one PASS/FAIL verdict line outside pytest's
capture, then asserts the same condition.
"""

import json
import random
import socket
import statistics
import threading
import time

import pytest

from linkalign import cli
from linkalign.alignment import (
    ISSUER_SCOPE,
    REASON_CYCLE,
    REASON_OVERLAP,
    SEMMAP_NS,
    AlignmentRule,
    RuleRegistry,
    RuleSet,
    Subweb,
)
from linkalign.engine import DEFAULT_SKIP_LIST, TraversalConfig, execute
from linkalign.fixtures import QUERY_NAMES, centralized_oracle, export_directory, rebase
from linkalign.sources import DirectorySource, HttpSource, InMemorySource
from linkalign.sparql import (
    BGP,
    EvaluationView,
    Filtered,
    Query,
    ResultTable,
    TriplePattern,
    Union,
    Variable,
    evaluate,
    parse_query,
)
from linkalign.ntriples import serialize_ntriples
from linkalign.terms import (
    RDF_TYPE,
    XSD_INTEGER,
    BlankNode,
    Iri,
    Literal,
    SourcedTriple,
)
from linkalign.turtle import parse_turtle


_capture = None


@pytest.fixture(autouse=True)
def _verdict_stream(capsys):
    # Lets verdict() print past pytest's capture so every PASS/FAIL line
    # shows up in the live run log.
    global _capture
    _capture = capsys
    yield
    _capture = None


def verdict(name: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}: {name}"
    if detail:
        line += f" [{detail}]"
    if _capture is not None:
        with _capture.disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)
    assert ok, line


def run_fixture_query(fx, name, alignment):
    query = parse_query(fx.queries[name])
    cfg = TraversalConfig(
        seeds=fx.seeds[name],
        deterministic=True,
        alignment_enabled=alignment == "on",
        namespace_skip_list=DEFAULT_SKIP_LIST | frozenset(fx.skip_prefixes),
    )
    return execute(query, cfg, InMemorySource(fx.documents))


@pytest.fixture(scope="module")
def het_dir(het_fixture, tmp_path_factory):
    return export_directory(het_fixture, tmp_path_factory.mktemp("accept") / "het")


# -- recovered completeness on the heterogeneous network -----------------


def test_completeness_recovery(het_fixture):
    problems = []
    on_reports = {}
    for name in QUERY_NAMES:
        report = run_fixture_query(het_fixture, name, "on")
        on_reports[name] = report
        oracle = centralized_oracle(het_fixture, name, "on")
        if not report.results.same_multiset(oracle):
            problems.append(f"{name}: traversal differs from centralized evaluation")
        if report.total_duration_ms >= 10_000:
            problems.append(f"{name}: took {report.total_duration_ms:.0f} ms")
    for name in ("User information", "Posts of a user"):
        off = run_fixture_query(het_fixture, name, "off").results
        on = on_reports[name].results
        if not off.is_strict_submultiset(on):
            problems.append(f"{name}: alignment-off is not a strict subset")
        if not len(off.rows) < len(on.rows):
            problems.append(f"{name}: alignment-off did not lose rows")
    verdict("completeness-recovery", not problems, "; ".join(problems))


# -- alignment is inert on an already-uniform network --------------------


def test_base_network_invariance(base_fixture):
    problems = []
    for name in QUERY_NAMES:
        on = run_fixture_query(base_fixture, name, "on")
        off = run_fixture_query(base_fixture, name, "off")
        if not on.results.same_multiset(off.results):
            problems.append(f"{name}: results differ")
        if on.rule_sets_discovered or off.rule_sets_discovered:
            problems.append(f"{name}: rule sets discovered on a uniform network")
    verdict("base-network-invariance", not problems, "; ".join(problems))


# -- alignment overhead stays bounded ------------------------------------


def test_traversal_overhead_bound(base_fixture):
    runs = 10
    problems = []
    deltas = []
    for name in QUERY_NAMES:
        on_ms = []
        off_ms = []
        for _ in range(runs):
            on_ms.append(run_fixture_query(base_fixture, name, "on").total_duration_ms)
            off_ms.append(run_fixture_query(base_fixture, name, "off").total_duration_ms)
        median_on = statistics.median(on_ms)
        median_off = statistics.median(off_ms)
        deltas.append(f"{name}: {median_on - median_off:+.1f} ms")
        if median_on > 2.0 * median_off:
            problems.append(
                f"{name}: median {median_on:.1f} ms vs {median_off:.1f} ms off"
            )
    verdict(
        "traversal-overhead-bound",
        not problems,
        "; ".join(problems) if problems else "median deltas " + ", ".join(deltas),
    )


# -- rejection policy: overlaps and cycles --------------------------------


REJ = "http://rej.ex/"
VOC = "http://rejvoc.ex/"
REJ_SKIP = DEFAULT_SKIP_LIST | frozenset({VOC})


def overlap_network():
    card = f"{REJ}alice/card"
    return card, {
        card: f"""
            <> <{SEMMAP_NS}ruleSetLocation> <{REJ}rules-a> .
            <> <{SEMMAP_NS}ruleSetLocation> <{REJ}rules-b> .
            <#me> <{VOC}handle> "Alice" .
        """,
        f"{REJ}rules-a": f"""
            @prefix semmap: <{SEMMAP_NS}> .
            <#subweb> a semmap:Subweb ; semmap:iriPrefix "{REJ}" .
            <#m0> a semmap:Mapping ;
              semmap:subjectId <{VOC}handle> ;
              semmap:mappingRelation semmap:equivalentProperty ;
              semmap:objectId <{VOC}name> ;
              semmap:scope <#subweb> .
        """,
        f"{REJ}rules-b": f"""
            @prefix semmap: <{SEMMAP_NS}> .
            <#subweb> a semmap:Subweb ; semmap:iriPrefix "{REJ}alice/" .
            <#m0> a semmap:Mapping ;
              semmap:subjectId <{VOC}handle> ;
              semmap:mappingRelation semmap:equivalentProperty ;
              semmap:objectId <{VOC}other> ;
              semmap:scope <#subweb> .
        """,
    }


def cycle_network():
    card = f"{REJ}bob/card"
    return card, {
        card: f"""
            <> <{SEMMAP_NS}ruleSetLocation> <{REJ}bob/rules> .
            <#me> <{VOC}a> "X" .
        """,
        f"{REJ}bob/rules": f"""
            @prefix semmap: <{SEMMAP_NS}> .
            <#subweb> a semmap:Subweb ; semmap:iriPrefix "{REJ}bob/" .
            <#m0> a semmap:Mapping ;
              semmap:subjectId <{VOC}a> ;
              semmap:mappingRelation semmap:equivalentProperty ;
              semmap:objectId <{VOC}b> ;
              semmap:scope <#subweb> .
            <#m1> a semmap:Mapping ;
              semmap:subjectId <{VOC}b> ;
              semmap:mappingRelation semmap:equivalentProperty ;
              semmap:objectId <{VOC}a> ;
              semmap:scope <#subweb> .
        """,
    }


def test_rejection_policy():
    problems = []

    seed, docs = overlap_network()
    query = parse_query(
        f"SELECT ?n WHERE {{ {{ ?s <{VOC}name> ?n . }} UNION {{ ?s <{VOC}other> ?n . }} }}"
    )
    cfg = TraversalConfig(seeds=(seed,), deterministic=True, namespace_skip_list=REJ_SKIP)
    started = time.monotonic()
    report = execute(query, cfg, InMemorySource(docs))
    elapsed_s = time.monotonic() - started
    if [r.location for r in report.rule_sets_discovered] != [f"{REJ}rules-a"]:
        problems.append("overlap: first rule set was not the only one accepted")
    overlap_rejections = [r for r in report.rules_rejected if r.reason == REASON_OVERLAP]
    if [r.item for r in overlap_rejections] != [f"{REJ}rules-b"]:
        problems.append("overlap: second rule set was not rejected for overlap")
    rows = [row["n"].lexical for row in report.results.rows]
    if rows != ["Alice"]:
        problems.append(f"overlap: results {rows!r} do not reflect only the first set")
    if elapsed_s >= 5.0 or report.termination_cause == "timeout":
        problems.append("overlap: execution did not finish cleanly in time")

    seed, docs = cycle_network()
    query = parse_query(f"SELECT ?n WHERE {{ ?s <{VOC}b> ?n . }}")
    cfg = TraversalConfig(seeds=(seed,), deterministic=True, namespace_skip_list=REJ_SKIP)
    started = time.monotonic()
    report = execute(query, cfg, InMemorySource(docs))
    elapsed_s = time.monotonic() - started
    cycle_rejections = [r for r in report.rules_rejected if r.reason == REASON_CYCLE]
    if len(cycle_rejections) != 1 or f"{VOC}b -> {VOC}a" not in cycle_rejections[0].item:
        problems.append("cycle: the closing rule alone was not rejected")
    if len(report.rules_rejected) != len(cycle_rejections):
        problems.append("cycle: unexpected extra rejections")
    if [r.accepted_rule_count for r in report.rule_sets_discovered] != [1]:
        problems.append("cycle: the first rule was not kept")
    if [row["n"].lexical for row in report.results.rows] != ["X"]:
        problems.append("cycle: data was not rewritten by the surviving rule")
    if elapsed_s >= 5.0 or report.termination_cause == "timeout":
        problems.append("cycle: execution did not finish cleanly in time")

    verdict("rejection-policy", not problems, "; ".join(problems))


# -- scoping: rules only fire inside their subweb -------------------------


SCOPE_RELATIONS = ("predicate-equivalence", "class-equivalence", "entity-identity")


def random_scoped_registry(rng):
    """Disjoint subwebs with chain rules plus issuer rules; all accepted."""
    registry = RuleRegistry()
    rules_by_scope = {}
    web_count = rng.randrange(1, 4)
    subwebs = []
    for k in range(web_count):
        prefix = f"http://w{k}.ex/"
        location = f"{prefix}rules"
        subweb = Subweb(f"{location}#subweb", frozenset({prefix}))
        terms = [f"http://voc{k}.ex/t{i}" for i in range(6)]
        rng.shuffle(terms)
        rules = []
        for i in range(len(terms) - 1):
            if rng.random() < 0.6:
                rules.append(
                    AlignmentRule(
                        source_term=terms[i],
                        relation=rng.choice(SCOPE_RELATIONS),
                        target_term=terms[i + 1],
                        scope=subweb.id,
                        origin_document=location,
                        ordinal=len(rules),
                    )
                )
        outcome = registry.register_rule_set(RuleSet(location, subweb, tuple(rules)))
        assert outcome.accepted and not outcome.rejected_rules
        subwebs.append(subweb)
        rules_by_scope[subweb.id] = list(outcome.accepted_rules)

    issuer_terms = [f"http://issuer.ex/t{i}" for i in range(5)]
    rng.shuffle(issuer_terms)
    issuer_rules = []
    for i in range(len(issuer_terms) - 1):
        if rng.random() < 0.5:
            issuer_rules.append(
                AlignmentRule(
                    source_term=issuer_terms[i],
                    relation=rng.choice(SCOPE_RELATIONS),
                    target_term=issuer_terms[i + 1],
                    scope=ISSUER_SCOPE,
                    origin_document="urn:issuer",
                    ordinal=len(issuer_rules),
                )
            )
    outcome = registry.register_issuer_rules(issuer_rules)
    assert not outcome.rejected_rules
    rules_by_scope[ISSUER_SCOPE] = list(outcome.accepted_rules)
    return registry, subwebs, rules_by_scope


def reference_align(rules_by_scope, subwebs, t):
    """Chain-following oracle over the accepted rules, written independently."""
    edges = {
        (rule.scope, rule.category, rule.source_term): rule.target_term
        for rules in rules_by_scope.values()
        for rule in rules
    }
    scope = None
    for w in subwebs:
        if any(t.source.startswith(p) for p in w.prefixes):
            scope = w.id
            break

    def walk(value, category):
        cur = value
        while True:
            step = edges.get((scope, category, cur)) if scope else None
            if step is None:
                step = edges.get((ISSUER_SCOPE, category, cur))
            if step is None:
                return cur
            cur = step

    def rewrite(term, category):
        if isinstance(term, Iri):
            return Iri(walk(term.value, category))
        return term

    predicate = rewrite(t.predicate, "predicate")
    subject = rewrite(t.subject, "entity")
    obj_category = "class" if predicate == Iri(RDF_TYPE) else "entity"
    obj = rewrite(t.object, obj_category)
    return SourcedTriple(subject, predicate, obj, t.source, aligned=True)


def random_probe_triple(rng, subwebs, rules_by_scope):
    pools = [
        rule.source_term
        for rules in rules_by_scope.values()
        for rule in rules
    ] + [f"http://free.ex/x{i}" for i in range(3)]
    sources = [f"{p}doc" for w in subwebs for p in w.prefixes]
    sources += ["http://outside.ex/doc", "http://nowhere.ex/d2"]
    subject = Iri(rng.choice(pools))
    predicate = Iri(RDF_TYPE) if rng.random() < 0.3 else Iri(rng.choice(pools))
    obj = Literal("x") if rng.random() < 0.2 else Iri(rng.choice(pools))
    return SourcedTriple(subject, predicate, obj, rng.choice(sources))


def test_subweb_scoping():
    rng = random.Random(20_240_817)
    cases = 0
    problems = []
    for _ in range(40):
        registry, subwebs, rules_by_scope = random_scoped_registry(rng)
        issuer_only = {ISSUER_SCOPE: rules_by_scope[ISSUER_SCOPE]}
        for _ in range(3):
            t = random_probe_triple(rng, subwebs, rules_by_scope)
            cases += 1
            aligned, _ = registry.align_triple(t)
            expected = reference_align(rules_by_scope, subwebs, t)
            if aligned != expected:
                problems.append(f"{t} -> {aligned}, expected {expected}")
                continue
            outside = not any(
                t.source.startswith(p) for w in subwebs for p in w.prefixes
            )
            if outside:
                # Outside every subweb only issuer rules may fire.
                issuer_expected = reference_align(issuer_only, subwebs, t)
                if aligned != issuer_expected:
                    problems.append(f"subweb rules leaked onto {t.source}")
            for rule in rules_by_scope[ISSUER_SCOPE]:
                if rule.category == "predicate" and t.predicate == Iri(rule.source_term):
                    if aligned.predicate == t.predicate:
                        problems.append(f"issuer rule ignored for {t.source}")
    if cases < 100:
        problems.append(f"only {cases} cases generated")
    verdict(
        "subweb-scoping", not problems, "; ".join(problems[:3]) or f"{cases} cases"
    )


# -- evaluator agrees with brute-force enumeration ------------------------


EVAL_IRIS = [Iri(f"http://e.ex/i{i}") for i in range(6)]
EVAL_PREDS = [Iri(f"http://e.ex/p{i}") for i in range(3)]
EVAL_LITS = [Literal(str(i)) for i in range(3)]
EVAL_VARS = ["a", "b", "c", "d"]


def unify_brute(pattern, triple, bindings):
    out = dict(bindings)
    for pattern_term, value in zip(
        (pattern.subject, pattern.predicate, pattern.object), triple
    ):
        if isinstance(pattern_term, Variable):
            if out.setdefault(pattern_term.name, value) != value:
                return None
        elif pattern_term != value:
            return None
    return out


def brute_rows(group, triples):
    if isinstance(group, BGP):
        rows = [{}]
        for pattern in group.patterns:
            rows = [
                extended
                for bindings in rows
                for t in triples
                if (extended := unify_brute(pattern, t, bindings)) is not None
            ]
        return rows
    if isinstance(group, Union):
        return brute_rows(group.left, triples) + brute_rows(group.right, triples)
    if isinstance(group, Filtered):
        rows = brute_rows(group.inner, triples)
        if group.operator == "=":
            return [r for r in rows if group.variable in r and r[group.variable] == group.value]
        return [r for r in rows if group.variable in r and r[group.variable] != group.value]
    raise TypeError(f"unknown group {group!r}")


def brute_table(query, triples):
    rows = brute_rows(query.pattern, triples)
    if query.group_by is not None:
        groups = {}
        for row in rows:
            key_term = row.get(query.group_by)
            key = ("unbound",) if key_term is None else ("bound", key_term)
            entry = groups.setdefault(key, [key_term, 0])
            if query.count_variable in row:
                entry[1] += 1
        rows = []
        for key_term, count in groups.values():
            row = {}
            if key_term is not None:
                row[query.group_by] = key_term
            row[query.count_alias] = Literal(str(count), XSD_INTEGER)
            rows.append(row)
    else:
        rows = [
            {name: row[name] for name in query.projection if name in row}
            for row in rows
        ]
    if query.distinct:
        seen = set()
        deduped = []
        for row in rows:
            key = frozenset(row.items())
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        rows = deduped
    return ResultTable(query.projection, rows)


def random_eval_pattern(rng, force_var_subject=False):
    def slot(constants, var_probability, force=False):
        if force or rng.random() < var_probability:
            return Variable(rng.choice(EVAL_VARS))
        return rng.choice(constants)

    return TriplePattern(
        slot(EVAL_IRIS, 0.6, force=force_var_subject),
        slot(EVAL_PREDS, 0.4),
        slot(EVAL_IRIS + EVAL_LITS, 0.6),
    )


def random_eval_query(rng):
    if rng.random() < 0.3:
        left = BGP(
            tuple(
                random_eval_pattern(rng, force_var_subject=(i == 0))
                for i in range(rng.randrange(1, 3))
            )
        )
        right = BGP((random_eval_pattern(rng),))
        shape = Union(left, right)
    else:
        shape = BGP(
            tuple(
                random_eval_pattern(rng, force_var_subject=(i == 0))
                for i in range(rng.randrange(1, 4))
            )
        )
    if rng.random() < 0.35:
        shape = Filtered(
            inner=shape,
            variable=rng.choice(sorted(shape.variables())),
            operator=rng.choice(("=", "!=")),
            value=rng.choice(EVAL_IRIS + EVAL_LITS),
        )
    variables = sorted(shape.variables())
    if rng.random() < 0.25:
        group_variable = rng.choice(variables)
        count_variable = rng.choice(variables)
        return Query(
            projection=(group_variable, "cnt"),
            pattern=shape,
            group_by=group_variable,
            count_variable=count_variable,
            count_alias="cnt",
        )
    projection = tuple(rng.sample(variables, rng.randrange(1, len(variables) + 1)))
    return Query(
        projection=projection, pattern=shape, distinct=rng.random() < 0.3
    )


def random_eval_view(rng):
    triples = []
    for _ in range(rng.randrange(0, 31)):
        subject = rng.choice(EVAL_IRIS + [BlankNode(f"n{rng.randrange(2)}")])
        triples.append(
            (subject, rng.choice(EVAL_PREDS), rng.choice(EVAL_IRIS + EVAL_LITS))
        )
    return EvaluationView(triples)


def test_evaluator_oracle():
    rng = random.Random(424_242)
    mismatches = []
    for case in range(200):
        view = random_eval_view(rng)
        query = random_eval_query(rng)
        query.validate()
        got = evaluate(query, view)
        expected = brute_table(query, view.triples())
        if not got.same_multiset(expected):
            mismatches.append(f"case {case}")
    verdict(
        "evaluator-oracle",
        not mismatches,
        "; ".join(mismatches[:5]) or "200 cases",
    )


# -- fixture documents round-trip through the serializer ------------------


def test_parser_round_trip(het_fixture, base_fixture):
    problems = []
    count = 0
    for fx in (het_fixture, base_fixture):
        for iri, text in fx.documents.items():
            count += 1
            first = parse_turtle(text, iri)
            serialized = serialize_ntriples(first.triples)
            second = parse_turtle(serialized, iri)
            if {t.spo() for t in second.triples} != {t.spo() for t in first.triples}:
                problems.append(iri)
                continue
            if serialize_ntriples(second.triples) != serialized:
                problems.append(f"{iri}: serialization is unstable")
    verdict(
        "parser-round-trip", not problems, "; ".join(problems[:3]) or f"{count} documents"
    )


# -- deterministic replays are byte-identical ------------------------------


def zeroed_report(path):
    data = json.loads(path.read_text(encoding="utf-8"))
    data["totalDurationMs"] = 0
    for record in data["documentsFetched"]:
        record["fetchDurationMs"] = 0
    return json.dumps(data, sort_keys=True)


def test_deterministic_replay(het_dir, tmp_path, capsys):
    outputs = []
    reports = []
    for i in range(2):
        report_path = tmp_path / f"report{i}.json"
        code = cli.run(
            [
                "query",
                "--fixture",
                str(het_dir),
                "--query-name",
                "Messages of liked users",
                "--deterministic",
                "--format",
                "json",
                "--report",
                str(report_path),
            ]
        )
        assert code == cli.EXIT_OK
        outputs.append(capsys.readouterr().out.encode("utf-8"))
        reports.append(zeroed_report(report_path))
    ok = outputs[0] == outputs[1] and reports[0] == reports[1]
    verdict(
        "deterministic-replay",
        ok,
        "" if ok else "stdout or report differs between identical runs",
    )


# -- all three backends see the same web ----------------------------------


@pytest.fixture(scope="module")
def hosted_origin(het_fixture):
    import uvicorn

    from linkalign.service import create_app

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    origin = f"http://127.0.0.1:{port}"
    app = create_app({"heterogeneous": het_fixture}, origin)
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("pod server did not start")
        time.sleep(0.02)
    yield origin
    server.should_exit = True
    thread.join(timeout=5)


def portable_rows(table, base_prefix):
    """Rows as sortable tuples with the network's own prefix masked out.

    Hosting moves every in-network IRI under a new origin, so equality
    across backends is up to that prefix. No projection binds blank nodes.
    """
    out = []
    for row in table.rows:
        cells = []
        for name in sorted(row):
            term = row[name]
            if isinstance(term, Iri) and term.value.startswith(base_prefix):
                cells.append((name, "base:" + term.value[len(base_prefix):]))
            else:
                cells.append((name, repr(term)))
        out.append(tuple(cells))
    return sorted(out)


def run_on_backend(fx, name, src):
    query = parse_query(fx.queries[name])
    cfg = TraversalConfig(
        seeds=fx.seeds[name],
        deterministic=True,
        alignment_enabled=True,
        namespace_skip_list=DEFAULT_SKIP_LIST | frozenset(fx.skip_prefixes),
    )
    report = execute(query, cfg, src)
    assert all(record.iri.startswith(fx.base_prefix) for record in report.documents_fetched)
    fetched = {
        record.iri[len(fx.base_prefix):]
        for record in report.documents_fetched
    }
    return portable_rows(report.results, fx.base_prefix), fetched


def test_backend_equivalence(het_fixture, het_dir, hosted_origin):
    moved = rebase(het_fixture, f"{hosted_origin}/pods/heterogeneous/")
    directory_source = DirectorySource(het_dir / "manifest.json")
    problems = []
    for name in QUERY_NAMES:
        memory_rows, memory_fetched = run_on_backend(
            het_fixture, name, InMemorySource(het_fixture.documents)
        )
        dir_rows, dir_fetched = run_on_backend(het_fixture, name, directory_source)
        http_rows, http_fetched = run_on_backend(moved, name, HttpSource())
        if not (memory_rows == dir_rows == http_rows):
            problems.append(f"{name}: result tables differ")
        if not (memory_fetched == dir_fetched == http_fetched):
            problems.append(f"{name}: fetched document sets differ")
    verdict("backend-equivalence", not problems, "; ".join(problems))
