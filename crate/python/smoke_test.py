#!/usr/bin/env python3
"""Smoke test for the qnr_herald_py extension module.

Build the extension first:

    cargo build -p qnr-herald-py --release

then run this script; it copies the cdylib next to itself under the
importable name and exercises the bound functions.
"""

import math
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    here = Path(__file__).resolve().parent
    suffix = ".pyd" if sys.platform == "win32" else ".so"
    target = here / f"qnr_herald_py{suffix}"
    candidates = [
        ROOT / "target" / "release" / "libqnr_herald_py.so",
        ROOT / "target" / "release" / "qnr_herald_py.dll",
        ROOT / "target" / "release" / "libqnr_herald_py.dylib",
        ROOT / "target" / "debug" / "libqnr_herald_py.so",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("extension not built; run: cargo build -p qnr-herald-py --release")
    if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(built, target)
    sys.path.insert(0, str(here))
    import qnr_herald_py

    return qnr_herald_py


def main():
    q = load_module()

    # thermal law at mu = 1 is 1 / 2^(n+1)
    probs = q.thermal_distribution(1.0, 5)
    assert math.isclose(probs[0], 0.5)
    assert math.isclose(probs[1], 0.25)
    assert q.truncation_cutoff(1.0, 1e-12) == 39

    assert q.stirling2(4, 2) == 7
    assert q.stirling2(10, 5) == 42525

    # representative point: mu = 1, eta = 0.8, delta = 5e-4
    p1 = q.single_click_probability(1, 1.0, 0.8, 0.0005)
    p8 = q.single_click_probability(8, 1.0, 0.8, 0.0005)
    assert abs(p1 - 0.445) < 0.005 and abs(p8 - 0.263) < 0.005

    f22 = q.single_photon_fidelity(22, 1.0, 0.8, 0.0005)
    assert abs(f22 - 0.777) < 0.005

    dist, herald_p, fidelity = q.heralded_distribution(8, 1.0, 0.8, 0.0005, 40)
    assert abs(fidelity - 0.759) < 0.005
    assert math.isclose(sum(dist), 1.0, rel_tol=1e-9)
    assert math.isclose(herald_p, p8, rel_tol=1e-12)

    assert math.isclose(q.fidelity_large_m_limit(1.0, 0.8, 0.0005), 0.09)

    # series, enumeration oracle, and closed form agree
    series = q.click_probability(4, 1, 1.0, 0.8, 0.0005, 25)
    exact = q.exact_click_probability(4, 1, 1.0, 0.8, 0.0005, 25)
    assert abs(series - exact) < 1e-10

    est, se = q.mc_click_probability(8, 1, 1.0, 0.8, 0.0005, 200_000, 42)
    assert abs(est - p8) < 4 * se
    assert (est, se) == q.mc_click_probability(8, 1, 1.0, 0.8, 0.0005, 200_000, 42)

    assert abs(q.approx_fidelity_opt(1.0, 0.8, 0.0005) - 21.58) < 0.01
    assert abs(q.approx_prob_local_max(1.0, 0.8, 0.0005) - 1105.26) < 0.01
    modes, fid, at_bound = q.find_fidelity_opt(1.0, 0.8, 0.0005, 200)
    assert modes == 22 and not at_bound and abs(fid - f22) < 1e-12
    local = q.find_prob_local_max(1.0, 0.8, 0.0005, 5000)
    assert local is not None and 1050 <= local[0] <= 1160
    assert q.find_prob_local_max(1.0, 0.8, 0.0, 1000) is None

    # validation surfaces as ValueError
    for bad in (
        lambda: q.thermal_distribution(-1.0, 5),
        lambda: q.single_click_probability(4, 1.0, 1.5, 0.0),
        lambda: q.heralded_distribution(4, 1.0, 0.0, 0.0, 20),
        lambda: q.approx_fidelity_opt(1.0, 0.8, 0.0),
    ):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("qnr_herald_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
