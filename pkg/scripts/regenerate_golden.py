"""Rebuild the CLI golden corpus under tests/golden/.

Writes the input files, a cases.json manifest and the expected output of
each case.  Run from anywhere:  python3 scripts/regenerate_golden.py
"""

from __future__ import annotations

import json
from pathlib import Path

from click.testing import CliRunner

from displaylab import linalg as L
from displaylab.cli import main
from displaylab.display import Display, ParabolicElement, Shape, twist_conjugate
from displaylab.flex import ThetaGaugeInstance
from displaylab.rings import GF

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
K3 = GF(3)


def _write_json(name: str, obj) -> None:
    (GOLDEN / name).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def write_inputs() -> None:
    (GOLDEN / "witt_exprs.txt").write_text(
        "; p times the Teichmuller lift of 1\n"
        "(F (V (teich 1)))\n"
        "(add (vec 1 0) (vec 1 0))\n"
        "(mul (teich 2) (int 5))\n"
        "(ghost (vec 2 1))\n",
        encoding="utf-8",
    )
    (GOLDEN / "witt_bad.txt").write_text("(add 1\n", encoding="utf-8")

    newton = [
        Display.identity(Shape.linear(1, 0), K3, 2),
        Display.linear(L.from_ints(K3, 3, [[0, 1], [1, 0]]), 1),
        Display.identity(Shape.linear(2, 1), K3, 3),
    ]
    _write_json("newton_examples.json", [U.to_json() for U in newton])
    _write_json("newton_guard.json", [Display.identity(Shape.linear(7, 1), K3, 2).to_json()])

    _write_json(
        "family_h2.json",
        {
            "U0": Display.identity(Shape.linear(2, 1), K3, 5).to_json(),
            "U1": Display.linear(L.from_ints(K3, 5, [[0, 1], [1, 0]]), 1).to_json(),
        },
    )

    jump = Display(Shape.graded(1, (1, 0)), K3, 3, (L.from_ints(K3, 3, [[2]]), L.from_ints(K3, 3, [[4]])))
    _write_json("flex_jump_display.json", jump.to_json())
    _write_json("flex_jump_gauge.json", {"r": 2, "d": [0, 2], "j": [0, 5], "unitary": False, "profile": {"a": [0, 0], "b": [1, 0]}})

    ident = Display(
        Shape.graded(2, (1, 1)),
        K3,
        3,
        (L.from_ints(K3, 3, [[1, 3], [2, 1]]), L.from_ints(K3, 3, [[0, 1], [1, 4]])),
    )
    _write_json("flex_identity_display.json", ident.to_json())
    _write_json("flex_identity_gauge.json", {"r": 2, "d": [0, 1], "j": [0, 0], "unitary": False, "profile": {"a": [0, 0], "b": [1, 1]}})

    worked = {"r": 4, "d": [0, 1, 2, 3], "j": [0, 5, 0, -5], "unitary": True, "profile": {"a": [0, 0, 0, 1], "b": [1, 0, 1, 1], "unitary": True}}
    _write_json("gauge_valid.json", worked)
    _write_json("gauge_broken.json", dict(worked, j=[0, 5, 1, -5]))
    theta = ThetaGaugeInstance((1, 2, 3, 0), (2, 3, 0, 1), (0, 0, 0, 0), ((0, 5, 1, -5),), ((0, 0, 0, 1),), ((1, 0, 1, 1),), ((0,),))
    _write_json("theta_broken.json", theta.to_json())

    idn = Display.identity(Shape.linear(2, 1), K3, 1)
    anti = Display.linear(L.from_ints(K3, 1, [[0, 1], [1, 0]]), 1)
    k = ParabolicElement.linear(L.from_ints(K3, 2, [[1, 3], [1, 2]]), 1)
    _write_json("classify_displays.json", [idn.to_json(), anti.to_json(), twist_conjugate(idn, k).to_json()])
    _write_json("classify_empty.json", [])


# name, argv (paths relative to the golden directory), expected exit code
CASES = [
    ("witt", ["witt", "witt_exprs.txt", "--ring", "3", "--level", "2"], 0),
    ("witt_csv", ["witt", "witt_exprs.txt", "--ring", "3", "--level", "2", "--format", "csv"], 0),
    ("newton", ["newton", "newton_examples.json"], 0),
    ("newton_pdiv", ["newton", "newton_examples.json", "--pdiv"], 0),
    ("family_scan_f81", ["family-scan", "family_h2.json", "--ring", "3^4"], 0),
    ("family_scan_sampled", ["family-scan", "family_h2.json", "--ring", "3^4", "--limit", "12", "--seed", "11"], 0),
    ("mazur_teich", ["mazur-scan", "--ring", "3", "--level", "3", "--height", "2", "--d", "1"], 0),
    ("mazur_seeded", ["mazur-scan", "--ring", "3", "--level", "5", "--limit", "40", "--seed", "7"], 0),
    ("flex_jump", ["flex", "flex_jump_display.json", "flex_jump_gauge.json"], 0),
    ("flex_identity", ["flex", "flex_identity_display.json", "flex_identity_gauge.json"], 0),
    ("gauge_valid", ["gauge-validate", "gauge_valid.json"], 0),
    ("gauge_broken", ["gauge-validate", "gauge_broken.json"], 1),
    ("theta_broken", ["gauge-validate", "theta_broken.json"], 1),
    ("classify", ["classify", "classify_displays.json"], 0),
    ("classify_empty", ["classify", "classify_empty.json"], 0),
]


def run_case(argv: list[str], golden: Path = GOLDEN) -> tuple[int, str]:
    args = [str(golden / a) if (golden / a).is_file() else a for a in argv]
    res = CliRunner().invoke(main, args, catch_exceptions=False)
    return res.exit_code, res.stdout


def main_() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    write_inputs()
    manifest = []
    for name, argv, code in CASES:
        got, text = run_case(argv)
        if got != code:
            raise SystemExit(f"{name}: exit code {got}, expected {code}")
        out = f"{name}.out"
        (GOLDEN / out).write_text(text, encoding="utf-8")
        manifest.append({"name": name, "argv": argv, "exit": code, "output": out})
    _write_json("cases.json", manifest)
    print(f"wrote {len(manifest)} golden cases to {GOLDEN}")


if __name__ == "__main__":
    main_()
