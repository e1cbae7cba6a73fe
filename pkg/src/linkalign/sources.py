"""Document fetching backends: in-memory fixtures, directory trees, live HTTP.

Document identity is the fragmentless IRI: fragments are stripped before
lookup or request, and the stripped IRI tags every parsed triple's source.
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from pathlib import Path
from typing import Optional, Protocol
from urllib.parse import quote, urlsplit

import requests

from .terms import Document, defragment, is_absolute_iri
from .turtle import ParseError, parse_turtle

KIND_NOT_FOUND = "not-found"
KIND_TIMEOUT = "timeout"
KIND_PARSE = "parse"
KIND_REDIRECT_LOOP = "redirect-loop"
KIND_IO = "io"


class FetchError(Exception):
    """A document could not be retrieved or parsed."""

    def __init__(
        self,
        iri: str,
        kind: str,
        detail: str = "",
        parse_error: Optional[ParseError] = None,
    ):
        super().__init__(f"{kind} fetching <{iri}>: {detail}" if detail else f"{kind} fetching <{iri}>")
        self.iri = iri
        self.kind = kind
        self.detail = detail
        self.parse_error = parse_error


class SourceLayer(Protocol):
    def fetch(self, iri: str) -> Document: ...


def _parse_document(iri: str, text: str) -> Document:
    try:
        return parse_turtle(text, iri)
    except ParseError as exc:
        raise FetchError(iri, KIND_PARSE, str(exc), parse_error=exc) from exc


def _check_absolute(iri: str) -> str:
    if not is_absolute_iri(iri):
        raise ValueError(f"fetch needs an absolute IRI, got {iri!r}")
    return defragment(iri)


class InMemorySource:
    """Documents from a map of IRI to Turtle text."""

    def __init__(self, documents: dict[str, str]):
        self._documents = dict(documents)

    def fetch(self, iri: str) -> Document:
        iri = _check_absolute(iri)
        text = self._documents.get(iri)
        if text is None:
            raise FetchError(iri, KIND_NOT_FOUND, "no such document in fixture")
        return _parse_document(iri, text)


class DirectorySource:
    """Documents from folders described by a JSON manifest.

    The manifest maps IRI prefix strings to folder paths relative to the
    manifest file; a document lives at the longest matching prefix's folder
    under the percent-encoded IRI suffix plus ``.ttl``.
    """

    def __init__(self, manifest_path: str | Path):
        self._manifest_path = Path(manifest_path)
        with open(self._manifest_path, encoding="utf-8") as fh:
            mapping = json.load(fh)
        if not isinstance(mapping, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()
        ):
            raise ValueError("directory manifest must map IRI prefixes to folder paths")
        self._prefixes = sorted(mapping.items(), key=lambda kv: -len(kv[0]))
        self._root = self._manifest_path.parent

    def document_path(self, iri: str) -> Optional[Path]:
        for prefix, folder in self._prefixes:
            if iri.startswith(prefix):
                name = quote(iri[len(prefix):], safe="") + ".ttl"
                return self._root / folder / name
        return None

    def fetch(self, iri: str) -> Document:
        iri = _check_absolute(iri)
        path = self.document_path(iri)
        if path is None or not path.is_file():
            raise FetchError(iri, KIND_NOT_FOUND, f"no file for <{iri}>")
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise FetchError(iri, KIND_IO, str(exc)) from exc
        return _parse_document(iri, text)


class HttpSource:
    """Live HTTP fetching with Turtle content negotiation.

    Sends Accept: text/turtle, follows at most five redirects, and
    serializes requests per host.
    """

    MAX_REDIRECTS = 5

    def __init__(self, timeout_ms: int = 10_000, session: Optional[requests.Session] = None):
        self._timeout = timeout_ms / 1000.0
        self._session = session or requests.Session()
        self._session.max_redirects = self.MAX_REDIRECTS
        self._host_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def _host_lock(self, iri: str) -> threading.Lock:
        host = urlsplit(iri).netloc
        with self._locks_guard:
            return self._host_locks[host]

    def fetch(self, iri: str) -> Document:
        iri = _check_absolute(iri)
        try:
            with self._host_lock(iri):
                response = self._session.get(
                    iri,
                    headers={"Accept": "text/turtle"},
                    timeout=self._timeout,
                    allow_redirects=True,
                )
        except requests.Timeout as exc:
            raise FetchError(iri, KIND_TIMEOUT, str(exc)) from exc
        except requests.TooManyRedirects as exc:
            raise FetchError(iri, KIND_REDIRECT_LOOP, str(exc)) from exc
        except requests.RequestException as exc:
            raise FetchError(iri, KIND_IO, str(exc)) from exc
        if response.status_code in (404, 410):
            raise FetchError(iri, KIND_NOT_FOUND, f"HTTP {response.status_code}")
        if response.status_code != 200:
            raise FetchError(iri, KIND_IO, f"HTTP {response.status_code}")
        final_iri = defragment(response.url)
        return _parse_document(final_iri, response.text)


class CachedSource:
    """Caches fetch outcomes, including errors, per fragmentless IRI."""

    def __init__(self, inner: SourceLayer):
        self._inner = inner
        self._cache: dict[str, Document | FetchError] = {}
        self._lock = threading.Lock()

    def fetch(self, iri: str) -> Document:
        key = _check_absolute(iri)
        with self._lock:
            cached = self._cache.get(key)
        if cached is None:
            try:
                cached = self._inner.fetch(key)
            except FetchError as exc:
                cached = exc
            with self._lock:
                # First writer wins so concurrent fetches agree afterwards.
                cached = self._cache.setdefault(key, cached)
        if isinstance(cached, FetchError):
            raise cached
        return cached


def with_cache(src: SourceLayer) -> CachedSource:
    return CachedSource(src)
