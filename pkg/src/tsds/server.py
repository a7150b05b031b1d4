"""HTTP front end.

Mode 1 (``/tsdb/{file}-v{n}.bin?[Start:End]``) streams raw index ranges of a
stored file with NaN padding past EOF. Mode 2
(``/tsds/{dataset}.{suffix}?{constraint}``) runs the query pipeline and
encodes the result per suffix. ``/tsds/catalog.json`` lists the catalog for
clients. Handlers share only the immutable catalog and immutable store files,
so requests are served fully concurrently.
"""

from __future__ import annotations

import json
import logging
import re
import signal
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import unquote, urlsplit

from . import encoders
from .catalog import Catalog, scan_catalog
from .constraints import parse_constraint
from .engine import execute
from .errors import (
    ConstraintSyntaxError,
    IndexNegative,
    NotFound,
    TsdsError,
    UnknownSuffix,
)
from .ncml import ASCII_IOSP
from .store import TsdbStore, parse_series_filename
from .timecodec import offset_to_time

log = logging.getLogger(__name__)

_INDEX_RANGE_RE = re.compile(r"\[(?P<start>-?\d+):(?P<stop>-?\d+)?\]\Z")

_CONTENT_TYPES = {
    "asc": "text/plain; charset=utf-8",
    "bin": "application/octet-stream",
    "csv": "text/csv; charset=utf-8",
    "dat": "text/plain; charset=utf-8",
    "das": "text/plain; charset=utf-8",
    "dds": "text/plain; charset=utf-8",
    "info": "text/plain; charset=utf-8",
    "json": "application/json",
    "ncml": "text/xml; charset=utf-8",
    "html": "text/html; charset=utf-8",
}

_IMMUTABLE = "public, max-age=31536000, immutable"


@dataclass
class Response:
    status: int
    content_type: str
    body: bytes | Iterable[bytes]
    headers: list[tuple[str, str]] = field(default_factory=list)

    @classmethod
    def text(cls, status: int, content_type: str, text: str,
             headers: list[tuple[str, str]] | None = None) -> "Response":
        return cls(status, content_type, text.encode("utf-8"), headers or [])


def _error_response(status: int, exc: Exception) -> Response:
    if isinstance(exc, TsdsError):
        payload = {"error": exc.name, "message": str(exc)}
        if exc.position is not None:
            payload["position"] = exc.position
    else:
        payload = {"error": "IoError", "message": str(exc)}
    return Response.text(status, "application/json", json.dumps(payload) + "\n")


class App:
    """Route requests against one immutable catalog snapshot."""

    def __init__(self, catalog: Catalog, tsdb_dir, static_dir=None):
        self.catalog = catalog
        self.tsdb_dir = Path(tsdb_dir)
        self.static_dir = Path(static_dir) if static_dir else None
        self.mode1_store = TsdbStore(self.tsdb_dir)

    # --- dispatch ---------------------------------------------------------

    def handle(self, path: str, query: str = "") -> Response:
        path = unquote(path)
        query = unquote(query)
        try:
            if path == "/" or path == "":
                return self._landing()
            if path == "/tsds/catalog.json":
                return self._catalog_json()
            if path.startswith("/tsdb/"):
                return self._mode1(path[len("/tsdb/"):], query)
            if path.startswith("/tsds/"):
                return self._mode2(path[len("/tsds/"):], query)
            if self.static_dir is not None and path.startswith("/ui/"):
                return self._static(path[len("/ui/"):])
            return _error_response(404, NotFound(f"no route for {path!r}"))
        except NotFound as exc:
            return _error_response(404, exc)
        except TsdsError as exc:
            return _error_response(400, exc)
        except OSError as exc:
            log.exception("I/O failure serving %s", path)
            return _error_response(500, exc)

    # --- Mode 1 -------------------------------------------------------------

    def _mode1(self, filename: str, query: str) -> Response:
        if "/" in filename:
            raise NotFound(f"bad TSDB path {filename!r}")
        if filename.endswith(".ncml"):
            sibling = filename[:-len(".ncml")] + ".bin"
            parse_series_filename(sibling)  # name discipline also covers metadata
            path = self.tsdb_dir / filename
            if not path.is_file():
                raise NotFound(f"no TSDB metadata file {filename!r}")
            return Response(200, _CONTENT_TYPES["ncml"], path.read_bytes(),
                            [("Cache-Control", _IMMUTABLE), ("ETag", f'"{filename}"')])
        try:
            parse_series_filename(filename)
        except TsdsError:
            raise NotFound(f"not a TSDB series filename: {filename!r}") from None
        if not self.mode1_store.exists(filename):
            raise NotFound(f"no TSDB file {filename!r}")

        count = self.mode1_store.element_count(filename)
        open_ended = False
        if query == "":
            start, stop, open_ended = 0, count - 1, True
        else:
            m = _INDEX_RANGE_RE.match(query)
            if m is None:
                raise ConstraintSyntaxError(
                    f"malformed index range {query!r}, expected [Start:End]", position=0)
            start = int(m.group("start"))
            if m.group("stop") is None:
                stop, open_ended = count - 1, True
            else:
                stop = int(m.group("stop"))

        if start < 0:
            raise IndexNegative(f"start index {start} is less than zero")
        headers = [("Cache-Control", _IMMUTABLE), ("ETag", f'"{filename}"')]
        if open_ended and stop < start:
            # open-ended range starting at or past EOF: nothing to stream
            return Response(200, _CONTENT_TYPES["bin"], b"", headers)
        body = self.mode1_store.iter_element_bytes(filename, start, stop)
        headers.append(("Content-Length", str((stop - start + 1) * 8)))
        return Response(200, _CONTENT_TYPES["bin"], body, headers)

    # --- Mode 2 ---------------------------------------------------------------

    def _mode2(self, spec: str, query: str) -> Response:
        if "/" in spec:
            raise NotFound(f"bad dataset path {spec!r}")
        name, dot, suffix = spec.rpartition(".")
        if not dot:
            raise NotFound(f"missing output suffix on {spec!r}")
        if suffix not in _CONTENT_TYPES:
            raise UnknownSuffix(f"unknown output suffix {suffix!r}")
        entry = self.catalog.entry(name)
        d = entry.descriptor

        headers = []
        if self._is_versioned(name):
            headers = [("Cache-Control", _IMMUTABLE), ("ETag", f'"{name}.{suffix}"')]

        if suffix == "ncml":
            return Response(200, _CONTENT_TYPES["ncml"], entry.path.read_bytes(), headers)
        if suffix == "info":
            first, last = self._coverage(entry)
            return Response.text(
                200, _CONTENT_TYPES["info"], encoders.encode_info(d, name, first, last),
                headers)
        if suffix == "dds":
            return Response.text(200, _CONTENT_TYPES["dds"],
                                 encoders.encode_dds(d, name), headers)
        if suffix == "das":
            return Response.text(200, _CONTENT_TYPES["das"],
                                 encoders.encode_das(d, name), headers)
        if suffix == "html":
            return self._dataset_page(name)

        constraint = parse_constraint(query)
        table = execute(d, constraint, TsdbStore(entry.base_dir))
        if suffix == "csv":
            body = (chunk.encode("utf-8") for chunk in encoders.iter_csv(table, d))
            return Response(200, _CONTENT_TYPES["csv"], body, headers)
        if suffix == "dat":
            return Response.text(200, _CONTENT_TYPES["dat"],
                                 encoders.encode_dat(table, d), headers)
        if suffix == "asc":
            return Response.text(200, _CONTENT_TYPES["asc"],
                                 encoders.encode_asc(table, d), headers)
        if suffix == "json":
            return Response.text(200, _CONTENT_TYPES["json"],
                                 encoders.encode_json(table, d, name), headers)
        if suffix == "bin":
            return Response(200, _CONTENT_TYPES["bin"],
                            encoders.encode_bin(table, d), headers)
        raise UnknownSuffix(f"unknown output suffix {suffix!r}")

    def _is_versioned(self, name: str) -> bool:
        try:
            parse_series_filename(name + ".bin")
            return True
        except TsdsError:
            return False

    def _coverage(self, entry) -> tuple[str | None, str | None]:
        d = entry.descriptor
        axis = d.time_axis
        try:
            enc = d.time_encoding
            if axis.mode == "uniform":
                first = axis.start
                last = axis.start + (axis.length - 1) * axis.increment
            elif axis.iosp != ASCII_IOSP:
                store = TsdbStore(entry.base_dir)
                first = float(store.read_elements(axis.time_file, 0, 0).values[0])
                last = float(store.read_elements(
                    axis.time_file, axis.length - 1, axis.length - 1).values[0])
            else:
                return None, None
            return offset_to_time(first, enc), offset_to_time(last, enc)
        except Exception:
            return None, None

    # --- listings / pages -----------------------------------------------------

    def _catalog_json(self) -> Response:
        datasets = []
        for name in self.catalog.names():
            entry = self.catalog.entries[name]
            d = entry.descriptor
            first, last = self._coverage(entry)
            datasets.append({
                "name": name,
                "title": d.title,
                "dataType": d.data_type,
                "startDate": d.start_date.isoformat(),
                "stopDate": d.stop_date.isoformat(),
                "timeUnits": d.time_units,
                "samples": d.length,
                "pointsPerDay": d.points_per_day,
                "md5": d.md5,
                "coverage": {"first": first, "last": last},
                "variables": [{
                    "name": v.name,
                    "longName": v.long_name,
                    "units": v.units,
                    "components": v.layout.components_per_sample,
                    "componentLabels": list(v.layout.component_labels or []) or None,
                } for v in d.variables],
            })
        body = json.dumps({"datasets": datasets}, separators=(",", ":")) + "\n"
        return Response.text(200, "application/json", body)

    def _landing(self) -> Response:
        items = "\n".join(
            f'<li><a href="/tsds/{name}.html">{name}</a></li>'
            for name in self.catalog.names())
        html = ("<!DOCTYPE html><html><head><title>Time series data server</title></head>"
                f"<body><h1>Datasets</h1><ul>{items}</ul>"
                '<p><a href="/tsds/catalog.json">catalog.json</a></p></body></html>\n')
        return Response.text(200, _CONTENT_TYPES["html"], html)

    def _dataset_page(self, name: str) -> Response:
        links = " | ".join(
            f'<a href="/tsds/{name}.{suffix}">{suffix}</a>'
            for suffix in encoders.OUTPUT_SUFFIXES)
        html = (f"<!DOCTYPE html><html><head><title>{name}</title></head>"
                f"<body><h1>{name}</h1><p>{links}</p>"
                f'<p>See <a href="/tsds/{name}.info">info</a> for request options.</p>'
                "</body></html>\n")
        return Response.text(200, _CONTENT_TYPES["html"], html)

    def _static(self, rel: str) -> Response:
        if not rel or rel.endswith("/"):
            rel = (rel or "") + "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())):
            raise NotFound("path escapes the static directory")
        if not target.is_file():
            raise NotFound(f"no static file {rel!r}")
        suffix = target.suffix.lstrip(".")
        ctype = {"html": _CONTENT_TYPES["html"], "js": "text/javascript",
                 "css": "text/css", "json": "application/json",
                 "map": "application/json"}.get(suffix, "application/octet-stream")
        return Response(200, ctype, target.read_bytes())


# --- stdlib HTTP adapter ------------------------------------------------------------


def make_handler(app: App):
    class Handler(BaseHTTPRequestHandler):
        server_version = "tsds/0.1"

        def do_GET(self):  # noqa: N802 (stdlib naming)
            started = time.monotonic()
            parts = urlsplit(self.path)
            response = app.handle(parts.path, parts.query)
            try:
                self.send_response(response.status)
                self.send_header("Content-Type", response.content_type)
                self.send_header("Access-Control-Allow-Origin", "*")
                body = response.body
                have_length = False
                for name, value in response.headers:
                    if name.lower() == "content-length":
                        have_length = True
                    self.send_header(name, value)
                if isinstance(body, bytes):
                    if not have_length:
                        self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                else:
                    self.end_headers()
                    for chunk in body:
                        self.wfile.write(chunk)
            except (BrokenPipeError, ConnectionResetError):
                log.info("client dropped connection on %s", self.path)
            finally:
                ms = (time.monotonic() - started) * 1000.0
                log.info("GET %s %d %.1fms", self.path, response.status, ms)

        def log_message(self, fmt, *args):
            pass  # request logging handled above

    return Handler


class Server:
    """ThreadingHTTPServer wrapper with graceful shutdown."""

    def __init__(self, app: App, host: str = "127.0.0.1", port: int = 8000):
        self.httpd = ThreadingHTTPServer((host, port), make_handler(app))
        self.httpd.daemon_threads = False  # drain in-flight requests on shutdown

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def serve_forever(self):
        self.httpd.serve_forever()

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()

    def __enter__(self):
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self.shutdown()
        self._thread.join(timeout=10)
        return False


def build_app(catalog_dir, tsdb_dir=None, static_dir=None) -> App:
    catalog = scan_catalog(catalog_dir)
    return App(catalog, tsdb_dir or catalog_dir, static_dir)


def run(app: App, host: str, port: int) -> int:
    """Serve until SIGTERM/SIGINT, then drain and exit cleanly."""
    server = Server(app, host, port)
    stop = threading.Event()

    def _stop(signum, frame):
        log.info("signal %d: shutting down", signum)
        stop.set()

    previous = {}
    for sig in (signal.SIGTERM, signal.SIGINT):
        previous[sig] = signal.signal(sig, _stop)
    thread = threading.Thread(target=server.serve_forever)
    thread.start()
    log.info("serving on %s:%d", host, server.port)
    try:
        while not stop.wait(0.2):
            pass
    finally:
        server.shutdown()
        thread.join()
        for sig, handler in previous.items():
            signal.signal(sig, handler)
    return 0
