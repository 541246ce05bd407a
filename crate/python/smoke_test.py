#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension module with cargo (unless ONLINECOLOR_SKIP_BUILD is
set), loads it, and exercises the main types and operations end to end.
Run from the repository root:

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    if not os.environ.get("ONLINECOLOR_SKIP_BUILD"):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "onlinecolor-py"],
            cwd=ROOT,
            check=True,
        )
    built = ROOT / "target" / "release" / "libonlinecolor_py.so"
    if not built.exists():  # macOS fallback
        built = ROOT / "target" / "release" / "libonlinecolor_py.dylib"
    target = ROOT / "python" / "onlinecolor_py.so"
    shutil.copyfile(built, target)
    sys.path.insert(0, str(ROOT / "python"))
    import onlinecolor_py

    return onlinecolor_py


def main():
    oc = build_and_import()
    print(f"loaded onlinecolor_py {oc.__version__}")

    # --- instance model and serialization -------------------------------
    s = oc.Stream([[], [0], [0, 1]])
    assert len(s) == 3 and s.edges() == [(0, 1), (0, 2), (1, 2)]
    assert oc.Stream.from_json(s.to_json()).to_text() == s.to_text()

    # --- FirstFit and its forcing family --------------------------------
    adv = oc.gen_firstfit_adversary(16)
    colors = oc.first_fit(adv, 16)
    assert len(set(colors)) == 8, "FirstFit must burn n/2 colors"
    assert oc.is_bipartite(len(adv), adv.edges())
    short = oc.first_fit(adv, 7)
    assert any(c is None for c in short), "a 7-color palette must run out"

    # --- small-graph oracles --------------------------------------------
    c5 = [(i, (i + 1) % 5) for i in range(5)]
    assert oc.chromatic_number(5, c5) == 3
    assert oc.is_l_color_set(5, c5, [0], 3, 1)
    assert not oc.is_l_color_set(4, [(a, b) for a in range(4) for b in range(a + 1, 4)], [0, 1, 2, 3], 3, 3)

    # --- bipartite algorithms -------------------------------------------
    grade = oc.gen_grade_instance(6, 1)
    det = oc.lst89(grade)
    assert oc.validate(grade, det["colors"]) is None
    assert det["max_color"] <= 2 * math.log2(len(grade) + 1)
    rnd = oc.randomized_lst(grade, 7)
    assert oc.validate(grade, rnd["colors"]) is None
    assert oc.randomized_lst(grade, 7) == rnd, "seeded runs replay"

    hard = oc.gen_grade_adversarial_instance(6, 1)
    assert oc.lst89(hard)["max_color"] == 2 * 7 - 1 or oc.lst89(hard)["max_color"] == 2 * 7
    assert oc.randomized_lst(hard, 3)["max_color"] < oc.lst89(hard)["max_color"]

    # --- general and k-colorable pipelines ------------------------------
    planted3 = oc.gen_random_k_colorable(150, 3, 0.3, 5)
    run3 = oc.color_k(planted3, 3)
    assert run3["complete"]
    assert oc.validate(planted3, run3["colors"]) is None

    planted4 = oc.gen_random_k_colorable(200, 4, 0.4, 9)
    run4 = oc.color_4(planted4)
    assert run4["complete"]
    assert oc.validate(planted4, run4["colors"]) is None

    clique8 = oc.Stream([list(range(v)) for v in range(8)])
    locally = oc.color_locally(clique8, 2)
    assert not locally["complete"], "a dense clique is not locally 2-colorable"
    w = locally["witness"]
    induced = [
        (i, j)
        for i, a in enumerate(w)
        for j, b in enumerate(w)
        if i < j and (min(a, b) in clique8.neighbors(max(a, b)))
    ]
    assert oc.chromatic_number(len(w), induced) > 2, "witness must not be 2-colorable"

    comp = oc.competitive(planted3)
    assert oc.validate(planted3, comp["colors"]) is None

    # --- analysis pipelines ---------------------------------------------
    # cherry: two leaves merged by a root — the root stays at level 1 with
    # probability exactly 1/2
    dist = oc.exact_level_distribution([2, 2, None])
    assert (1, 1, 2) in dist[2] and (2, 1, 2) in dist[2]

    row = oc.gamma_upper_bound(1)
    assert row["gamma"] == "2.822285e-1"
    assert row["coefficient"] == "1.095852"

    assert Fraction(*oc.lower_anchor("phi2")) == Fraction(31, 42)
    assert Fraction(*oc.lower_anchor("phiB")) == Fraction(1, 3)
    assert Fraction(*oc.potential("phiA", [1, 2], [3])) == Fraction(17, 24)

    minimal = ([1], [2])
    inc = Fraction(*oc.potential_increase([minimal] * 4, "phi1", "phi1"))
    assert inc >= Fraction(3, 2)

    print("smoke test passed")


if __name__ == "__main__":
    main()
