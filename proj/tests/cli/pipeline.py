"""End-to-end checks of the command-line tool.

usage: pipeline.py <chbu binary> <schema directory>
"""

import json
import pathlib
import subprocess
import sys
import tempfile
from fractions import Fraction

import jsonschema
import referencing

BIN = str(pathlib.Path(sys.argv[1]).resolve())
SCHEMAS = pathlib.Path(sys.argv[2])

resources = []
for path in SCHEMAS.glob("*.schema.json"):
    doc = json.loads(path.read_text())
    resources.append((doc["$id"], referencing.Resource.from_contents(doc)))
registry = referencing.Registry().with_resources(resources)
BASE = "https://chbu.invalid/schemas/"

failures = []


def check(cond, what):
    print(("PASS " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def conforms(obj, schema):
    validator = jsonschema.Draft202012Validator({"$ref": BASE + schema}, registry=registry)
    errors = list(validator.iter_errors(obj))
    for e in errors[:3]:
        print("   schema:", e.message)
    return not errors


def run(*args):
    p = subprocess.run([BIN, "-q", *map(str, args)], capture_output=True, text=True, cwd=WORK)
    report = json.loads(p.stdout) if p.stdout.strip() else None
    if report is not None and not conforms(report, "report.schema.json"):
        failures.append("report schema for " + args[0])
    return p.returncode, report


def write(name, obj):
    (WORK / name).write_text(json.dumps(obj))
    return name


def load(name):
    return json.loads((WORK / name).read_text())


with tempfile.TemporaryDirectory() as tmp:
    WORK = pathlib.Path(tmp)

    one = write("one.json", {"id": "half", "inputs": [], "outputs": [0], "cyclic": False,
                             "gates": [{"kind": "CONST", "zeta": "1/2", "in": [], "out": 0}]})
    code, rep = run("embed", one, "-o", "emb.json")
    check(code == 0 and rep["details"]["agents"] == 4, "embed one gate gives 4 agents")
    check(conforms(load("emb.json"), "embedded_instance.schema.json"), "embedded instance matches schema")
    check(rep["provenance"] == ["circuit:half", "instance:half/embedded"], "embed provenance chain")
    code, _ = run("validate", "emb.json")
    check(code == 0, "embedded instance re-validates")

    poly = write("p.json", {"vars": 1, "terms": [{"coef": 2, "exps": [1]}, {"coef": -1, "exps": [0]}]})
    check(conforms(load(poly), "polynomial.schema.json"), "polynomial matches schema")
    code, rep = run("reduce-feasible", poly, "-o", "red.json", "--root", "1/2", "--witness-out", "w.json")
    check(code == 0, "reduce-feasible encodes the root of 2X-1")
    n = rep["details"]["agents"]
    check(rep["details"]["cut_budget"] == n - 1, "budget is n - 1")
    check(conforms(load("w.json"), "ch_solution.schema.json"), "solution matches schema")
    code, rep = run("verify", "--instance", "red.json", "--solution", "w.json", "--max-cuts", n - 1)
    check(code == 0 and rep["details"]["verdict"]["all_satisfied"], "verify accepts the encoded root")
    check(rep["provenance"][-1].startswith("solution:"), "verify provenance ends in the solution")
    code, _ = run("verify", "--instance", "red.json", "--solution", "w.json", "--max-cuts", 1)
    check(code == 3, "verify rejects a solution over budget")
    code, rep = run("decode", "--instance", "red.json", "--solution", "w.json")
    check(code == 0 and rep["details"]["artifact"]["inputs"] == ["1/2"], "decode recovers X = 1/2")

    nope = write("q.json", {"vars": 1, "terms": [{"coef": 1, "exps": [1]}, {"coef": 1, "exps": [0]}]})
    code, _ = run("reduce-feasible", nope, "--root", "0")
    check(code == 3, "a non-root of X+1 is refused with exit 3")

    uni = write("uni.json", {"id": "uniform", "domain_length": "1", "agents": [
        {"name": "u", "piecewise": {"breakpoints": ["0", "1"], "pieces": [["0", "1", "0"]], "integral": True}}]})
    check(conforms(load(uni), "ch_instance.schema.json"), "instance matches schema")
    code, rep = run("ch2bu", "--instance", uni, "-o", "bu.json")
    check(code == 0 and rep["details"]["dimension"] == 1, "ch2bu gives dimension 1")
    check(conforms(load("bu.json"), "bu_instance.schema.json"), "bu instance matches schema")
    code, rep = run("solve-bu", "--bu", "bu.json", "--epsilon", "1/64", "-o", "approx.json")
    approx = load("approx.json")
    check(code == 0 and Fraction(approx["residual"]) <= Fraction(1, 64), "solve-bu residual <= 1/64")
    check(conforms(approx, "approx_solution.schema.json"), "approximate solution matches schema")
    code, rep = run("round", "--bu", "bu.json", "--solution", "approx.json", "--instance", uni,
                    "-o", "exact.json", "--ch-out", "ch.json")
    check(code == 0 and rep["details"]["bu_verify"]["passed"], "round gives an exact BU solution")
    code, _ = run("verify", "--bu", "bu.json", "--solution", "exact.json")
    check(code == 0, "verify accepts the rounded BU point at tol 0")
    code, _ = run("verify", "--instance", uni, "--solution", "ch.json")
    check(code == 0, "verify accepts the decoded CH solution at tol 0")
    code, rep = run("solve-bu", "--bu", "bu.json", "--epsilon", "1/64", "--lambda", "1/1000")
    check(code == 3 and "lipschitz_witness" in rep["details"], "undersized lambda yields a witness")
    code, rep = run("solve-bu", "--bu", "bu.json", "--epsilon", "1/64", "--max-dimension", "0")
    check(code == 2 and rep["details"]["error"] == "DimensionTooLarge", "dimension refusal exits 2")

    sub = write("sub.json", {"id": "sub", "inputs": [0, 1], "outputs": [2], "cyclic": False,
                             "gates": [{"kind": "SUB_01", "in": [0, 1], "out": 2}]})
    run("embed", sub, "-o", "esub.json")
    code, _ = run("encode", "--instance", "esub.json", "--inputs", "1/4,3/4", "-o", "ssub.json")
    cuts = [Fraction(c) for c in load("ssub.json")["cuts"]]
    check(code == 0 and cuts[8] == 24 + 1 - Fraction(1, 10), "SUB_01 ad cut sits 1/10 left of its interval")
    code, rep = run("decode", "--instance", "esub.json", "--solution", "ssub.json")
    check(rep["details"]["artifact"]["outputs"] == ["0/1"], "SUB_01 decodes to 0")
    code, _ = run("encode", "--instance", "esub.json", "--values", "1/4,3/4,1/2")
    check(code == 3, "encoding values that violate the circuit exits 3")

    code, _ = run("emit-etr", "--instance", uni, "--cuts", 1, "--solution", "ch.json",
                  "--witness-out", "wit.json", "-o", "s.etr")
    check(code == 0, "emit-etr with a witness")
    code, rep = run("check-etr", "s.etr", "--step", "1/8", "--witness", "wit.json")
    check(code == 0 and rep["details"]["exact"], "check-etr confirms the witness exactly")
    run("emit-etr", "--instance", uni, "--cuts", 0, "-o", "s0.etr")
    code, rep = run("check-etr", "s0.etr", "--step", "1/16")
    check(code == 3 and not rep["details"]["sat"], "zero cuts for the uniform agent is UNKNOWN")
    code, rep = run("emit-etr", "--circuit", sub, "--format", "smt2")
    check(code == 0 and "(check-sat)" in rep["details"]["artifact"], "SMT-LIB export")

    game = write("pennies.json", {"id": "pennies", "strategies": [2, 2],
                                  "payoffs": [["1", "-1", "-1", "1"], ["-1", "1", "1", "-1"]]})
    check(conforms(load(game), "game.schema.json"), "game matches schema")
    code, rep = run("reduce-game", game, "-o", "closed.json", "--profile", "1/2,1/2,1/2,1/2", "--expect-fixed")
    check(code == 0 and rep["details"]["closed_satisfied"] and rep["details"]["regret"] == "0/1",
          "uniform profile is a fixed point of matching pennies")
    check(conforms(load("closed.json"), "circuit.schema.json"), "closed circuit matches schema")
    code, _ = run("validate", "closed.json")
    check(code == 0, "closed circuit validates")
    code, _ = run("reduce-game", game, "--profile", "1,0,1,0", "--expect-fixed")
    check(code == 3, "a pure profile is not a fixed point")

    (WORK / "bad.json").write_text('{"inputs": [')
    code, rep = run("validate", "bad.json")
    check(code == 1 and rep["details"]["error"] == "ParseError", "malformed JSON exits 1")
    code, _ = run("verify", "--instance", uni, "--solution", "ch.json", "--tol", "0.5")
    check(code == 1, "decimal tolerance is rejected")

    first = run("lower", sub, "--seed", 7)[1]
    second = run("lower", sub, "--seed", 7)[1]
    check(first == second and first["details"]["samples"]["output_mismatches"] == 0, "lower is deterministic")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
