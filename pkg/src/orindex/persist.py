"""On-disk index directories.

An index directory holds one ``<table>.tbl`` file per table and a
``manifest.txt`` of ``key=value`` lines (representation, cost model, index
plan, corpus stats, table schemas and stats).  Access paths are not stored;
they are rebuilt from the plan when the index is loaded.  Saving the same
index twice produces byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

from .representations import IndexPlan, Representation, SearchIndex, schemas_for
from .size_model import CorpusStats
from .storage import CostModel, FieldKind, HeapTable

MANIFEST = "manifest.txt"
FORMAT = "orindex-1"
_COST_FIELDS = ("tuple_overhead_bytes", "field_bytes", "page_bytes",
                "string_header_bytes", "posting_element_bytes")


def _manifest(index: SearchIndex) -> str:
    lines = [f"format={FORMAT}", f"representation={index.kind.value}"]
    lines += [f"cost.{name}={getattr(index.cost, name)}" for name in _COST_FIELDS]
    lines += [f"plan.kind={index.plan.kind or 'none'}",
              f"plan.pr_doc_index={str(index.plan.pr_doc_index).lower()}",
              f"plan.hor_key_index={str(index.plan.hor_key_index).lower()}"]
    for name in ("N", "D", "N_d", "W"):
        lines.append(f"stats.{name}={getattr(index.stats, name)}")
    for name, table in index.tables.items():
        schema = ",".join(f"{attr}:{kind.value}" for attr, kind in table.schema)
        stats = table.stats()
        lines += [f"table.{name}.schema={schema}",
                  f"table.{name}.tuples={stats.tuples}",
                  f"table.{name}.bytes={stats.bytes}",
                  f"table.{name}.pages={stats.pages}"]
    return "\n".join(lines) + "\n"


def save_index(index: SearchIndex, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, table in index.tables.items():
        table.save(directory / f"{name}.tbl")
    (directory / MANIFEST).write_text(_manifest(index), encoding="utf-8")
    return directory


def read_manifest(directory) -> dict[str, str]:
    out = {}
    text = (Path(directory) / MANIFEST).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{MANIFEST}:{lineno}: expected key=value")
        out[key] = value
    if out.get("format") != FORMAT:
        raise ValueError(f"unsupported index format {out.get('format')!r}")
    return out


def load_index(directory, on_disk: bool = False) -> SearchIndex:
    """Load an index directory and rebuild its access paths.

    With ``on_disk`` the tables stay in their files and pages are read on
    demand (read-only); otherwise the tables are loaded into memory.
    """
    directory = Path(directory)
    meta = read_manifest(directory)
    kind = Representation(meta["representation"])
    cost = CostModel(**{name: int(meta[f"cost.{name}"]) for name in _COST_FIELDS})
    plan_kind = meta["plan.kind"]
    plan = IndexPlan(None if plan_kind == "none" else plan_kind,
                     pr_doc_index=meta["plan.pr_doc_index"] == "true",
                     hor_key_index=meta["plan.hor_key_index"] == "true")
    stats = CorpusStats(**{name: int(meta[f"stats.{name}"]) for name in ("N", "D", "N_d", "W")})
    tables = {}
    for name, expected in schemas_for(kind).items():
        schema = [tuple(item.split(":")) for item in meta[f"table.{name}.schema"].split(",")]
        schema = [(attr, FieldKind(k)) for attr, k in schema]
        if schema != expected:
            raise ValueError(f"schema of table {name!r} does not match representation {kind.value}")
        path = directory / f"{name}.tbl"
        opener = HeapTable.open if on_disk else HeapTable.load
        tables[name] = opener(path, name, schema, cost)
    index = SearchIndex(kind, cost, tables, stats, plan)
    index.build_access_paths()
    return index


def close_index(index: SearchIndex) -> None:
    for table in index.tables.values():
        table.close()
