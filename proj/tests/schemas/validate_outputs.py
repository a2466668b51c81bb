"""Validates shipped data files and live CLI / HTTP output against schemas/."""

import json
import pathlib
import re
import subprocess
import sys
import urllib.error
import urllib.request

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

BINARY = sys.argv[1]
ROOT = pathlib.Path(sys.argv[2])
SCHEMAS = ROOT / "schemas"
DATA = ROOT / "data"

resources = []
for path in SCHEMAS.glob("*.schema.json"):
    doc = json.loads(path.read_text())
    resources.append((doc["$id"], Resource.from_contents(doc)))
registry = Registry().with_resources(resources)
failures = []


def validator(name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema, registry=registry)


def check(name, label, doc):
    errors = sorted(validator(name).iter_errors(doc), key=lambda e: list(e.path))
    status = "ok" if not errors else "FAILED"
    print(f"{status:6} {name:16} {label}")
    for e in errors[:5]:
        print(f"         {list(e.path)}: {e.message}")
    if errors:
        failures.append(label)


def run(*args):
    out = subprocess.run([BINARY, *args], check=True, capture_output=True, text=True).stdout
    return json.loads(out)


check("network", "route_ground_truth.json", json.loads((DATA / "route_ground_truth.json").read_text()))
check("network", "route_network.json", json.loads((DATA / "route_network.json").read_text()))
check("records", "route_records_seed1.json", json.loads((DATA / "route_records_seed1.json").read_text()))
for row in sorted((DATA / "evidence").glob("row*.json")):
    check("evidence", f"evidence/{row.name}", json.loads(row.read_text()))

model = str(DATA / "route_network.json")
for row in range(1, 6):
    check("result", f"infer row {row}",
          run("infer", "--model", model, "--evidence", str(DATA / "evidence" / f"row{row}.json")))
check("records", "sample --n 5", run("sample", "--model", str(DATA / "route_ground_truth.json"), "--n", "5"))
check("network", "learn", run("learn", "--structure", str(DATA / "route_ground_truth.json"),
                              "--records", str(DATA / "route_records_seed1.json")))
check("scenario_report", "scenario --seed 1", run("scenario", "--seed", "1"))
check("scenario_report", "scenario --seeds 3 --row 4", run("scenario", "--seeds", "3", "--row", "4"))

server = subprocess.Popen([BINARY, "serve", "--model", model, "--port", "0"],
                          stderr=subprocess.PIPE, text=True)
try:
    line = server.stderr.readline()
    match = re.search(r":(\d+)\s*$", line)
    if not match:
        raise SystemExit(f"serve did not report a port: {line!r}")
    base = f"http://127.0.0.1:{match.group(1)}"

    def request(path, body=None):
        data = None if body is None else json.dumps(body).encode()
        req = urllib.request.Request(base + path, data=data,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=10) as resp:
                return resp.status, json.loads(resp.read())
        except urllib.error.HTTPError as e:
            return e.code, json.loads(e.read())

    status, doc = request("/api/model")
    check("network", f"GET /api/model ({status})", doc)
    status, doc = request("/api/scenario/rows")
    for r in doc:
        check("evidence", f"GET /api/scenario/rows row {r['row']}", r["evidence"])
    row4 = json.loads((DATA / "evidence" / "row4.json").read_text())
    status, doc = request("/api/infer", row4)
    check("result", f"POST /api/infer row 4 ({status})", doc)
    status, doc = request("/api/infer", {"hard": {"BRIDGE": "up"}})
    check("error", f"POST /api/infer unknown node ({status})", doc)
    if status != 400:
        failures.append("unknown node status")
finally:
    server.terminate()
    server.wait(timeout=10)

if failures:
    print(f"{len(failures)} document(s) failed validation")
    sys.exit(1)
print("all documents valid")
