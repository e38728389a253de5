#!/usr/bin/env python3
"""Validate burstlab JSON output and example configs against schemas/.

usage: check_schemas.py BURSTLAB_BINARY SOURCE_DIR
exit 0 ok, 1 validation failure, 2 usage, 77 jsonschema missing
"""
import json
import pathlib
import subprocess
import sys

try:
    import jsonschema
except ImportError:
    print("jsonschema not installed, skipping")
    sys.exit(77)


def main():
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    exe, src = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in (src / "schemas").glob("*.schema.json")}
    failures = 0

    def check(kind, doc, label):
        nonlocal failures
        cls = jsonschema.validators.validator_for(schemas[kind])
        errors = sorted(cls(schemas[kind]).iter_errors(doc), key=lambda e: list(e.path))
        for e in errors[:5]:
            print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {label}")

    def run(*args):
        out = subprocess.run([exe, *args], check=True, capture_output=True, text=True).stdout
        return json.loads(out)

    for cfg in sorted((src / "configs").glob("*.json")):
        check("config", json.loads(cfg.read_text()), f"config {cfg.name}")
    for preset in ("jacobi-1d", "jacobi-2d", "seidel-2d"):
        check("analyze", run("analyze", "--preset", preset, "--verbose"), f"analyze {preset}")
        check("layout", run("layout", "--preset", preset), f"layout {preset}")
    for preset, n, t in (("jacobi-1d", "40", "20"), ("jacobi-2d", "24", "8"), ("seidel-2d", "24", "8")):
        report = run("simulate", "--preset", preset, "--n", n, "--t", t)
        check("simreport", report, f"simulate {preset}")
        check("config", report["config"], f"simulate {preset} embedded config")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
