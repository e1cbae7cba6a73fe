"""Command-line front end: generate fixtures, run queries, serve the API."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .alignment import issuer_rules_from_json
from .engine import (
    CAUSE_TIMEOUT,
    DEFAULT_SKIP_LIST,
    POLICIES,
    POLICY_FOLLOW_ALL,
    TraversalConfig,
    execute,
)
from .fixtures import (
    CONFIGURATION_BASE,
    CONFIGURATION_HETEROGENEOUS,
    FixtureConfig,
    FixtureSet,
    export_directory,
    generate,
    load_fixture,
)
from .sources import DirectorySource, HttpSource, InMemorySource
from .sparql.parser import QueryParseError, UnsupportedQueryFeature, parse_query
from .sparql.results import ResultTable, term_to_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FETCH_FATAL = 2
EXIT_TIMEOUT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1, not argparse's default 2.
    def error(self, message: str):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="linkalign", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="write a fixture directory")
    gen.add_argument("--pods", type=int, default=8)
    gen.add_argument("--posts", type=int, default=20)
    gen.add_argument("--likes", type=int, default=10)
    gen.add_argument("--tags", type=int, default=12)
    gen.add_argument("--variant-fraction", type=float, default=0.5)
    gen.add_argument(
        "--config",
        choices=(CONFIGURATION_BASE, CONFIGURATION_HETEROGENEOUS),
        default=CONFIGURATION_HETEROGENEOUS,
    )
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--out", required=True)

    query = sub.add_parser("query", help="run one query over a fixture or the live web")
    query.add_argument("--fixture")
    query.add_argument("--seed", action="append", default=[], metavar="IRI")
    query.add_argument("--query-file")
    query.add_argument("--query-name")
    query.add_argument("--alignment", choices=("on", "off"), default="on")
    query.add_argument("--policy", choices=POLICIES, default=POLICY_FOLLOW_ALL)
    query.add_argument("--max-docs", type=int, default=1000)
    query.add_argument("--timeout-ms", type=int, default=180_000)
    query.add_argument("--deterministic", action="store_true")
    query.add_argument("--workers", type=int, default=4)
    query.add_argument("--format", choices=("json", "csv", "table"), default="table")
    query.add_argument("--report", metavar="PATH")
    query.add_argument("--issuer-rules", metavar="PATH")

    serve = sub.add_parser("serve", help="host fixtures and the execution API")
    serve.add_argument("--fixture", action="append", default=[], metavar="PATH")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--pods", type=int, default=8)
    serve.add_argument("--variant-fraction", type=float, default=0.5)
    serve.add_argument("--seed", type=int, default=7)
    return parser


def _format_table(table: ResultTable) -> str:
    headers = list(table.variables)
    rendered = [
        [term_to_text(row.get(v)) if row.get(v) is not None else "" for v in headers]
        for row in table.rows
    ]
    widths = [
        max([len(h)] + [len(r[idx]) for r in rendered]) for idx, h in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))).rstrip(),
    ]
    for r in rendered:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))).rstrip())
    lines.append(f"({len(table.rows)} rows)")
    return "\n".join(lines) + "\n"


def _render(table: ResultTable, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(table.to_json_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return table.to_csv()
    return _format_table(table)


def _cmd_generate(args: argparse.Namespace) -> int:
    cfg = FixtureConfig(
        pod_count=args.pods,
        posts_per_pod=args.posts,
        likes_per_pod=args.likes,
        tag_vocabulary_size=args.tags,
        variant_fraction=args.variant_fraction,
        random_seed=args.seed,
        configuration=args.config,
    )
    fx = generate(cfg)
    out = export_directory(fx, args.out)
    sys.stdout.write(f"{out}\n")
    return EXIT_OK


def _load_query_fixture(args: argparse.Namespace) -> tuple[Optional[FixtureSet], object]:
    path = Path(args.fixture)
    if not path.exists():
        raise _UsageError(f"fixture path does not exist: {path}")
    fx = load_fixture(path)
    if path.is_dir() and (path / "manifest.json").is_file():
        src: object = DirectorySource(path / "manifest.json")
    else:
        src = InMemorySource(fx.documents)
    return fx, src


def _cmd_query(args: argparse.Namespace) -> int:
    if bool(args.query_file) == bool(args.query_name):
        raise _UsageError("query needs exactly one of --query-file / --query-name")
    if bool(args.fixture) == bool(args.seed):
        raise _UsageError("query needs exactly one of --fixture / --seed")
    if args.query_name and not args.fixture:
        raise _UsageError("--query-name needs --fixture for the named query texts")

    fx: Optional[FixtureSet] = None
    if args.fixture:
        fx, src = _load_query_fixture(args)
    else:
        src = HttpSource()

    if args.query_name:
        assert fx is not None
        if args.query_name not in fx.queries:
            raise _UsageError(
                f"unknown query name {args.query_name!r}; "
                f"fixture offers: {', '.join(fx.queries)}"
            )
        query_text = fx.queries[args.query_name]
        seeds = fx.seeds[args.query_name]
    else:
        query_path = Path(args.query_file)
        if not query_path.is_file():
            raise _UsageError(f"query file does not exist: {query_path}")
        query_text = query_path.read_text(encoding="utf-8")
        if fx is not None:
            seeds = (f"{fx.base_prefix}u0/card",)
        else:
            seeds = tuple(args.seed)

    try:
        query = parse_query(query_text)
    except (QueryParseError, UnsupportedQueryFeature) as exc:
        raise _UsageError(f"query does not parse: {exc}") from exc

    issuer_rules = ()
    if args.issuer_rules:
        rules_path = Path(args.issuer_rules)
        if not rules_path.is_file():
            raise _UsageError(f"issuer rules file does not exist: {rules_path}")
        try:
            issuer_rules = tuple(issuer_rules_from_json(rules_path.read_text(encoding="utf-8")))
        except ValueError as exc:
            raise _UsageError(f"invalid issuer rules: {exc}") from exc

    skip = DEFAULT_SKIP_LIST
    if fx is not None:
        skip = skip | frozenset(fx.skip_prefixes)
    try:
        cfg = TraversalConfig(
            seeds=seeds,
            policy=args.policy,
            max_documents=args.max_docs,
            timeout_ms=args.timeout_ms,
            deterministic=args.deterministic,
            alignment_enabled=args.alignment == "on",
            namespace_skip_list=skip,
            workers=1 if args.deterministic else args.workers,
            issuer_rules=issuer_rules,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    report = execute(query, cfg, src)

    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    sys.stdout.write(_render(report.results, args.format))

    if not report.documents_fetched and report.fetch_errors:
        sys.stderr.write("no seed document was reachable\n")
        for failure in report.fetch_errors:
            sys.stderr.write(f"  {failure.iri}: {failure.kind} {failure.detail}\n")
        return EXIT_FETCH_FATAL
    if report.termination_cause == CAUSE_TIMEOUT:
        sys.stderr.write("execution timed out; results are partial\n")
        return EXIT_TIMEOUT
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    networks: dict[str, FixtureSet] = {}
    if args.fixture:
        for path in args.fixture:
            fx = load_fixture(path)
            networks[fx.config.configuration] = fx
    else:
        for configuration in (CONFIGURATION_BASE, CONFIGURATION_HETEROGENEOUS):
            networks[configuration] = generate(
                FixtureConfig(
                    pod_count=args.pods,
                    variant_fraction=args.variant_fraction,
                    random_seed=args.seed,
                    configuration=configuration,
                )
            )
    origin = f"http://{args.host}:{args.port}"
    app = create_app(networks, origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def run(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "generate":
            return _cmd_generate(args)
        if args.subcommand == "query":
            return _cmd_query(args)
        return _cmd_serve(args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
