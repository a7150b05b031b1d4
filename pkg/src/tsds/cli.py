"""Operator command line: build the cache, serve it, fetch from a server,
and validate stored files against their metadata digests.

Exit codes: 0 success, 1 user error, 2 internal error. All verbs are
scriptable (no prompts, deterministic output order). Configuration precedence
for ``serve``: flags > environment (TSDS_*) > config file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import urllib.error
import urllib.request
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

from . import __version__
from .catalog import scan_catalog
from .errors import TsdsError
from .ingest import build_cache, load_manifest
from .ncml import FileSource, load_ncml, parse_ncml
from .server import App, run
from .store import element_count, file_md5

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse with spec'd exit codes: usage problems are user errors (1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USER)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tsds {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("build", help="build or refresh the cache from a manifest")
    p.add_argument("manifests", nargs="+", metavar="MANIFEST", type=Path)
    p.add_argument("--out", required=True, type=Path, help="output cache directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel granule parsers")
    p.add_argument("--json", action="store_true", help="machine-readable summary")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("serve", help="serve a catalog over HTTP")
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--catalog-dir", type=Path)
    p.add_argument("--tsdb-dir", type=Path)
    p.add_argument("--static-dir", type=Path, help="optional browse UI files under /ui/")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("get", help="fetch a URL, verifying the digest when possible")
    p.add_argument("url")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("validate", help="check every .bin against its .ncml digest")
    p.add_argument("directory", type=Path)
    p.add_argument("--json", action="store_true", help="machine-readable summary")
    p.set_defaults(func=cmd_validate)
    return parser


# --- build -----------------------------------------------------------------------

def cmd_build(args) -> int:
    summary = []
    for manifest_path in args.manifests:
        manifest = load_manifest(manifest_path)
        for result in build_cache(manifest, args.out, jobs=args.jobs):
            summary.append({
                "key": result.key.base_name,
                "status": result.status,
                "version": result.key.version,
                "bin": str(result.bin_path),
                "ncml": str(result.ncml_path),
                "provenance": str(result.provenance_path),
                "gaps": result.gaps,
                "quarantined": result.quarantined,
            })
    if args.json:
        print(json.dumps({"builds": summary}, indent=2, sort_keys=True))
    else:
        for item in summary:
            print(f"{item['status']:>9}  v{item['version']}  {item['key']}.bin"
                  f"  (gaps={item['gaps']} quarantined={item['quarantined']})")
    return EXIT_OK


# --- serve -----------------------------------------------------------------------

def _setting(flag_value, env_name: str, file_values: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if env_name in os.environ:
        return os.environ[env_name]
    if key in file_values:
        return file_values[key]
    return default


def cmd_serve(args) -> int:
    file_values = {}
    if args.config:
        file_values = json.loads(args.config.read_text(encoding="utf-8"))
    host = str(_setting(args.host, "TSDS_HOST", file_values, "host", "127.0.0.1"))
    port = int(_setting(args.port, "TSDS_PORT", file_values, "port", 8000))
    catalog_dir = _setting(args.catalog_dir, "TSDS_CATALOG_DIR", file_values,
                           "catalog_dir", None)
    tsdb_dir = _setting(args.tsdb_dir, "TSDS_TSDB_DIR", file_values, "tsdb_dir", None)
    static_dir = _setting(args.static_dir, "TSDS_STATIC_DIR", file_values,
                          "static_dir", None)
    if catalog_dir is None:
        print("error: no catalog directory configured", file=sys.stderr)
        return EXIT_INTERNAL
    catalog_dir = Path(catalog_dir)
    if not catalog_dir.is_dir():
        print(f"error: catalog directory {catalog_dir} does not exist", file=sys.stderr)
        return EXIT_INTERNAL
    catalog = scan_catalog(catalog_dir)
    for record in catalog.quarantined:
        log.warning("quarantined %s: %s", record.path.name, record.reason)
    app = App(catalog, Path(tsdb_dir) if tsdb_dir else catalog_dir,
              Path(static_dir) if static_dir else None)
    try:
        return run(app, host, port)
    except OSError as exc:
        print(f"error: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


# --- get --------------------------------------------------------------------------

def _metadata_url(url: str) -> str | None:
    """For a full Mode 1 .bin fetch, the sibling .ncml URL; otherwise None."""
    parts = urlsplit(url)
    if parts.query or not parts.path.startswith("/tsdb/") or not parts.path.endswith(".bin"):
        return None
    ncml_path = parts.path[:-len(".bin")] + ".ncml"
    return urlunsplit((parts.scheme, parts.netloc, ncml_path, "", ""))


def cmd_get(args) -> int:
    try:
        with urllib.request.urlopen(args.url) as response:
            data = response.read()
    except urllib.error.HTTPError as exc:
        body = exc.read().decode("utf-8", "replace").strip()
        print(f"error: HTTP {exc.code}: {body}", file=sys.stderr)
        return EXIT_USER
    except urllib.error.URLError as exc:
        print(f"error: {exc.reason}", file=sys.stderr)
        return EXIT_USER
    args.out.write_bytes(data)
    print(f"wrote {len(data)} bytes to {args.out}")

    meta_url = _metadata_url(args.url)
    if meta_url is None:
        return EXIT_OK
    try:
        with urllib.request.urlopen(meta_url) as response:
            descriptor = parse_ncml(response.read().decode("utf-8"))
    except (urllib.error.URLError, TsdsError, ValueError):
        print("md5 skipped (no readable metadata)")
        return EXIT_OK
    if descriptor.md5 is None:
        print("md5 skipped (metadata advertises no digest)")
        return EXIT_OK
    actual = file_md5(args.out)
    if actual == descriptor.md5:
        print("md5 ok")
        return EXIT_OK
    print(f"error: md5 mismatch: expected {descriptor.md5}, got {actual}",
          file=sys.stderr)
    return EXIT_USER


# --- validate ------------------------------------------------------------------------

def cmd_validate(args) -> int:
    directory = args.directory
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_USER
    ok, skipped, failed = [], [], []
    for ncml_path in sorted(directory.glob("*.ncml")):
        name = ncml_path.name
        try:
            d = load_ncml(ncml_path)
        except (TsdsError, ValueError) as exc:
            failed.append((name, f"unparseable metadata: {exc}"))
            continue
        bin_sources = [v for v in d.variables if isinstance(v.source, FileSource)
                       and v.source.location.endswith(".bin")]
        problems = []
        for v in bin_sources:
            path = directory / v.source.location
            if not path.is_file():
                problems.append(f"missing {v.source.location}")
                continue
            expected = d.length * v.layout.components_per_sample
            actual = element_count(path)
            if actual != expected:
                problems.append(
                    f"{v.source.location}: {actual} values, metadata says {expected}")
        if d.time_axis.mode == "explicit" and d.time_axis.time_file.endswith(".bin"):
            tpath = directory / d.time_axis.time_file
            if not tpath.is_file():
                problems.append(f"missing time file {d.time_axis.time_file}")
            elif element_count(tpath) != d.length:
                problems.append(f"{d.time_axis.time_file}: wrong length")
        if d.md5 is not None and bin_sources:
            path = directory / bin_sources[0].source.location
            if path.is_file() and file_md5(path) != d.md5:
                problems.append(f"{bin_sources[0].source.location}: md5 mismatch")
        if problems:
            failed.append((name, "; ".join(problems)))
        elif d.md5 is None:
            skipped.append(name)
        else:
            ok.append(name)

    if args.json:
        print(json.dumps({
            "ok": sorted(ok),
            "skipped": sorted(skipped),
            "failed": [{"name": n, "reason": r} for n, r in sorted(failed)],
        }, indent=2, sort_keys=True))
    else:
        for name in ok:
            print(f"ok       {name}")
        for name in skipped:
            print(f"skipped  {name} (no MD5 attribute)")
        for name, reason in failed:
            print(f"FAILED   {name}: {reason}")
    return EXIT_USER if failed else EXIT_OK


# --- entry point ------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USER
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except TsdsError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return EXIT_USER
    except KeyboardInterrupt:
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001 (operator-facing catch-all)
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
