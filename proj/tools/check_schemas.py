#!/usr/bin/env python3
"""Validate run outputs and configs against schemas/*.schema.json.

usage: check_schemas.py RUN_DIR [CONFIG.json ...]
RUN_DIR may hold any of schedule.json, rounds.jsonl, cluster.json,
metrics.json and train_report.json; absent files are skipped.
"""
import json
import pathlib
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

SCHEMAS = pathlib.Path(__file__).resolve().parent.parent / "schemas"


def main(argv):
    if len(argv) < 2:
        print(__doc__, file=sys.stderr)
        return 1
    registry = Registry().with_resources(
        (p.name, Resource.from_contents(json.loads(p.read_text()))) for p in SCHEMAS.glob("*.schema.json"))

    def validator(name):
        return Draft202012Validator(json.loads((SCHEMAS / f"{name}.schema.json").read_text()), registry=registry)

    docs = []
    run = pathlib.Path(argv[1])
    for name in ("schedule", "cluster", "metrics", "train_report"):
        p = run / f"{name}.json"
        if p.exists():
            docs.append((name, str(p), json.loads(p.read_text())))
    p = run / "rounds.jsonl"
    if p.exists():
        for i, line in enumerate(p.read_text().splitlines()):
            docs.append(("rounds", f"{p}:{i + 1}", json.loads(line)))
    for c in argv[2:]:
        docs.append(("config", c, json.loads(pathlib.Path(c).read_text())))

    bad = 0
    for schema, where, doc in docs:
        for err in validator(schema).iter_errors(doc):
            bad += 1
            print(f"{where}: {'/'.join(map(str, err.absolute_path))}: {err.message}")
    print(f"{len(docs)} documents checked, {bad} errors")
    return 1 if bad or not docs else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
