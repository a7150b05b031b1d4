"""Directory scan of .ncml descriptors into an immutable, shareable catalog.

A parse failure quarantines that one entry (with the reason) and never aborts
the scan. Rescanning builds a fresh Catalog object to swap in atomically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NotFound, TsdsError
from .ncml import DatasetDescriptor, load_ncml

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    path: Path
    descriptor: DatasetDescriptor

    @property
    def base_dir(self) -> Path:
        return self.path.parent


@dataclass(frozen=True)
class QuarantineRecord:
    name: str
    path: Path
    reason: str


@dataclass
class Catalog:
    directory: Path
    entries: dict[str, CatalogEntry] = field(default_factory=dict)
    quarantined: list[QuarantineRecord] = field(default_factory=list)

    def names(self) -> list[str]:
        return sorted(self.entries)

    def entry(self, name: str) -> CatalogEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise NotFound(f"no dataset named {name!r}") from None

    def resolve(self, name: str) -> DatasetDescriptor:
        return self.entry(name).descriptor


def scan_catalog(directory) -> Catalog:
    """Parse every ``*.ncml`` file; each dataset is served under its filename stem."""
    directory = Path(directory)
    catalog = Catalog(directory)
    for path in sorted(directory.glob("*.ncml")):
        name = path.stem
        try:
            descriptor = load_ncml(path)
        except (TsdsError, ValueError, OSError) as exc:
            reason = f"{type(exc).__name__}: {exc}"
            log.warning("quarantined %s: %s", path.name, reason)
            catalog.quarantined.append(QuarantineRecord(name, path, reason))
            continue
        catalog.entries[name] = CatalogEntry(name, path, descriptor)
    return catalog


def resolve_dataset(catalog: Catalog, name: str) -> DatasetDescriptor:
    return catalog.resolve(name)
