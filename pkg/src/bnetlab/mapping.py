"""Claim table checks.

docs/claims.txt has one row per claim:

    slug | operation | test | status | acceptance criterion

Operations are dotted names under bnetlab and must carry the slug through
``@claim``; tests are ``path::function`` relative to the repository root.
Every tagged operation in the package must have a row, and every row with
an operation must match a tag.
"""

from __future__ import annotations

import ast
import importlib
import pkgutil
from pathlib import Path

STATUSES = ("verified-deterministic", "verified-statistical", "out-of-scope")
ROOT = Path(__file__).resolve().parents[2]
DEFAULT_TABLE = ROOT / "docs" / "claims.txt"


def read_table(path=None) -> list[dict]:
    path = Path(path) if path is not None else DEFAULT_TABLE
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        slug, op, test, status, crit = parts
        rows.append(dict(slug=slug, op=op, test=test, status=status, criterion=crit, line=lineno))
    return rows


def source_tags() -> dict[str, str]:
    """slug -> dotted operation, collected from every bnetlab module."""
    import bnetlab

    tags = {}
    for info in pkgutil.iter_modules(bnetlab.__path__):
        mod = importlib.import_module(f"bnetlab.{info.name}")
        for name, obj in vars(mod).items():
            if getattr(obj, "__module__", None) != mod.__name__:
                continue
            for slug in getattr(obj, "__claims__", ()):
                tags[slug] = f"{info.name}.{name}"
    return tags


def _resolve(op: str):
    mod, _, attr = op.rpartition(".")
    try:
        return getattr(importlib.import_module(f"bnetlab.{mod}"), attr)
    except (ImportError, AttributeError, ValueError):
        return None


def _test_names(path: Path) -> set[str]:
    tree = ast.parse(path.read_text())
    return {n.name for n in ast.walk(tree) if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))}


def mapping_problems(path=None, tests_root=None) -> list[str]:
    rows = read_table(path)
    tests_root = Path(tests_root) if tests_root is not None else ROOT
    tags = source_tags()
    out = []
    seen = set()
    cache = {}
    for r in rows:
        slug = r["slug"]
        if slug in seen:
            out.append(f"duplicate row for {slug}")
        seen.add(slug)
        if r["status"] not in STATUSES:
            out.append(f"{slug}: bad status {r['status']!r}")
        if r["status"] == "out-of-scope":
            if r["op"] != "-":
                out.append(f"{slug}: out-of-scope rows take no operation")
        elif r["op"] == "-":
            out.append(f"{slug}: verified rows need an operation")
        else:
            obj = _resolve(r["op"])
            if obj is None:
                out.append(f"{slug}: cannot resolve bnetlab.{r['op']}")
            elif slug not in getattr(obj, "__claims__", ()):
                out.append(f"{slug}: bnetlab.{r['op']} is not tagged with it")
        fname, _, func = r["test"].partition("::")
        f = tests_root / fname
        if f not in cache:
            cache[f] = _test_names(f) if f.is_file() else None
        if cache[f] is None:
            out.append(f"{slug}: no test file {fname}")
        elif func not in cache[f]:
            out.append(f"{slug}: no test {r['test']}")
    for slug, op in sorted(tags.items()):
        if slug not in seen:
            out.append(f"{slug}: tagged on {op} but missing from the table")
    return out


def check_mapping(path=None, tests_root=None) -> bool:
    return not mapping_problems(path, tests_root)


if __name__ == "__main__":
    problems = mapping_problems()
    print("\n".join(problems) if problems else "claims table OK")
    raise SystemExit(1 if problems else 0)
