"""The shipped schema and the built-in validator accept the same configurations."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
schema = json.loads((root / "schemas" / "experiment.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
check = jsonschema.Draft202012Validator(schema)

cases = [json.loads(p.read_text()) for p in sorted((root / "configs").glob("*.json"))]
base = {"experiment": "solve"}
cases += [
    {}, {"experiment": "bogus"}, {"experiment": "oracle", "alpha": 0.25}, {"experiment": "oracle", "alpha": 0},
    {"experiment": "oracle", "alpha": 0.2}, {"experiment": "oracle", "alpha": "x"},
    {"experiment": "doubling"}, {"experiment": "doubling", "seed": 0}, {"experiment": "oracle", "seed": -1},
    {"experiment": "oracle", "seed": 1.5}, {"experiment": "oracle", "eta": 0}, {"experiment": "oracle", "eta": 1.01},
    {"experiment": "oracle", "colour": 1}, {"experiment": "oracle", "output_dir": ""},
    {"experiment": "growth", "n_circles": 3}, {"experiment": "growth", "n_circles": 4},
    {"experiment": "growth", "source": "separable"}, {"experiment": "oracle", "source": "quadratic"},
    {"experiment": "cascade", "source": "solve-dual"}, {"experiment": "sections", "source": "oracle-primal"},
    dict(base, rhs="cubic"), dict(base, rhs="degenerate"), dict(base, h=0), dict(base, h=0.1),
    dict(base, solver={"scheme": "jacobi"}), dict(base, solver={"tol": 1e-8, "max_iters": 1}),
    dict(base, solver={"max_iters": 0}), dict(base, solver={"extra": 1}),
    dict(base, tolerances={"k0": 0}), dict(base, tolerances={"k0": 1e-2, "oracle": 1}), dict(base, tolerances={"x": 1}),
    {"experiment": "doubling", "seed": 1, "samples": []}, {"experiment": "doubling", "seed": 1, "samples": [5, 0]},
    {"experiment": "sections", "levels": {"ratio": 1}}, {"experiment": "sections", "levels": {"count": 1}},
    {"experiment": "sections", "levels": {"first": 0.5, "count": 3, "ratio": 1.5}},
    dict(base, domain={"kind": "square", "half_width": 1}), dict(base, domain={"kind": "square"}),
    dict(base, domain={"kind": "disk", "radius": -1}), dict(base, domain={"kind": "hexagon"}),
    dict(base, domain={"kind": "disk", "radius": 1, "half_width": 1}),
    dict(base, domain={"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}),
    dict(base, domain={"kind": "polygon", "vertices": [[0, 0], [1, 0]]}),
    dict(base, domain={"kind": "polygon", "vertices": [[0, 0], [1, 0], "x"]}),
    [], "oracle",
]

failures = 0
with tempfile.TemporaryDirectory() as tmp:
    path = pathlib.Path(tmp) / "c.json"
    for case in cases:
        path.write_text(json.dumps(case))
        by_cli = subprocess.run([cli, "validate", str(path)], capture_output=True).returncode == 0
        by_schema = check.is_valid(case)
        if by_cli != by_schema:
            failures += 1
            print(f"disagree: {json.dumps(case)} cli={by_cli} schema={by_schema}")
print(f"{len(cases)} cases, {failures} disagreements")
sys.exit(1 if failures else 0)
