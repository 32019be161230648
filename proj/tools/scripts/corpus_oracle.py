#!/usr/bin/env python3
"""Freeze expected.json for every corpus task.

Builds each fixture database from its SQL script with Python's sqlite3 module
and executes the task's ground-truth query directly. The C++ pipeline is not
involved, so the frozen rows act as an independent oracle.
"""
import json
import pathlib
import sqlite3
import sys
import tempfile


def affinity_of(value):
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "real"
    if isinstance(value, bytes):
        return "blob"
    if isinstance(value, str):
        return "text"
    return "numeric"


def build(script: pathlib.Path, out: pathlib.Path) -> None:
    conn = sqlite3.connect(out)
    conn.executescript(script.read_text())
    conn.commit()
    conn.close()


def main() -> int:
    corpus = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parents[2] / "corpus")
    with tempfile.TemporaryDirectory() as tmp:
        dbs = {}
        for script in sorted((corpus / "databases").glob("*.sql")):
            path = pathlib.Path(tmp) / (script.stem + ".sqlite")
            build(script, path)
            dbs[script.stem + ".sqlite"] = path
        for task in sorted((corpus / "tasks").iterdir()):
            db_name = pathlib.Path((task / "db").read_text().strip()).name
            conn = sqlite3.connect(dbs[db_name])
            cur = conn.execute((task / "query.sql").read_text())
            rows = [list(r) for r in cur.fetchall()]
            columns = []
            for i, d in enumerate(cur.description):
                first = next((r[i] for r in rows if r[i] is not None), None)
                columns.append({"name": d[0], "affinity": affinity_of(first)})
            ordered = "ORDER BY" in (task / "query.sql").read_text().upper()
            doc = {"columns": columns, "rows": rows, "truncated": False, "ordered": ordered}
            (task / "expected.json").write_text(json.dumps(doc, indent=2) + "\n")
            print(f"{task.name}: {len(rows)} rows")
            conn.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
