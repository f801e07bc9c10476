"""On-disk cache of structure tables.

Tables are stored as canonical JSON (sorted keys) with a SHA-256 checksum of
the entries in the header. Writes go to a temporary file in the target
directory that is renamed into place, so readers never see a partial file.
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, Optional, Union

from .algebra import StructureTable, Window, build_structure_table
from .exceptions import ChecksumMismatch
from .numerics import QuadratureSpec

logger = logging.getLogger(__name__)

TABLE_SCHEMA = "hypalg-structure-table/1"


def _canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def entries_checksum(table: StructureTable) -> str:
    return hashlib.sha256(_canonical_json(table.to_dict()["entries"]).encode("utf-8")).hexdigest()


def table_document(table: StructureTable) -> Dict:
    body = table.to_dict()
    body["schema"] = TABLE_SCHEMA
    body["checksum"] = entries_checksum(table)
    return body


def save_table(table: StructureTable, path: Union[str, Path]) -> str:
    """Write the table atomically and return its checksum."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = table_document(table)
    fd, tmp_name = tempfile.mkstemp(prefix=".table-", suffix=".json", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(_canonical_json(document))
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Saved structure table to {path}")
    return document["checksum"]


def load_table(path: Union[str, Path]) -> StructureTable:
    """Read a table and verify its checksum.

    Raises:
        ChecksumMismatch: if the stored checksum disagrees with the entries.
        FileNotFoundError: if the file does not exist.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ChecksumMismatch(f"Structure table {path} is not valid JSON: {e}")
    if document.get("schema") != TABLE_SCHEMA:
        raise ChecksumMismatch(f"Structure table {path} has schema {document.get('schema')!r}, expected {TABLE_SCHEMA!r}.")
    expected = document.get("checksum")
    actual = hashlib.sha256(_canonical_json(document.get("entries", {})).encode("utf-8")).hexdigest()
    if expected != actual:
        raise ChecksumMismatch(f"Structure table {path} fails its checksum (stored {expected}, computed {actual}).")
    return StructureTable.from_dict(document)


def table_cache_key(window: Window, tol: float, spec: Optional[QuadratureSpec] = None) -> str:
    """Digest of everything a table depends on.

    The constants are exact: ``algebra.expand_product`` integrates the
    polynomial product in u = 2/(x+1) with a Gauss-Legendre rule sized to its
    degree, so no tolerance-dependent quadrature enters. The quadrature spec is
    keyed only when a caller asks for it (tables built with the quadrature
    oracle).
    """
    from . import __version__

    payload = {"window": list(window), "tolerance": tol, "version": __version__}
    if spec is not None:
        payload["quadrature"] = spec.to_dict()
    return hashlib.sha256(_canonical_json(payload).encode("utf-8")).hexdigest()


def table_cache_path(
    cache_dir: Union[str, Path], window: Window, tol: float, spec: Optional[QuadratureSpec] = None
) -> Path:
    return Path(cache_dir) / f"structure_{table_cache_key(window, tol, spec)[:16]}.json"


def load_or_build(
    window: Window, tol: float, cache_dir: Optional[Union[str, Path]] = None, threads: Optional[int] = None
) -> StructureTable:
    """Return the cached table for (window, tol), building and caching it on a miss.

    A cached file that fails its checksum is rebuilt.
    """
    path = table_cache_path(cache_dir, window, tol) if cache_dir is not None else None
    if path is not None and path.exists():
        try:
            table = load_table(path)
            logger.debug(f"Loaded structure table from cache {path}")
            return table
        except ChecksumMismatch as e:
            logger.warning(f"Discarding cached structure table: {e}")
    table = build_structure_table(window, tol, threads)
    if path is not None:
        save_table(table, path)
    return table
