# Copyright 2026 The dromsos Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates the fixtures and the command-line outputs against schemas/."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def load(path):
    with open(path) as f:
        return json.load(f)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--source", required=True)
    args = parser.parse_args()
    root = pathlib.Path(args.source)
    schemas = {p.name.removesuffix(".schema.json"): load(p) for p in (root / "schemas").glob("*.schema.json")}
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)
    failures = 0

    def check(doc, schema, label):
        nonlocal failures
        errors = sorted(jsonschema.Draft202012Validator(schemas[schema]).iter_errors(doc), key=str)
        for e in errors:
            print(f"FAIL {label}: /{'/'.join(map(str, e.absolute_path))}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {label}")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for fixture in sorted((root / "tools" / "fixtures").glob("*.json")):
            check(load(fixture), "problem", fixture.name)
            report = tmp / f"{fixture.stem}.report.json"
            subprocess.run([args.cli, "solve", str(fixture), "--report", str(report)], capture_output=True)
            check(load(report), "report", report.name)
        ex51 = load(tmp / "ex51.report.json")
        moments = {"schema_version": 1, "monomial_order": "grlex", "p": 1, "degree": 5, "y": ex51["y"],
                   "support": load(root / "tools" / "fixtures" / "ex51.json")["support"]}
        check(moments, "moments", "ex51 moments")
        (tmp / "m.json").write_text(json.dumps(moments))
        out = subprocess.run([args.cli, "check-moments", str(tmp / "m.json")], capture_output=True, text=True)
        check(json.loads(out.stdout), "moments_report", "ex51 moments report")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
