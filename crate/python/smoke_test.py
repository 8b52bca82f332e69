"""Smoke test for the fracpme Python module.

Run after `pip install --no-build-isolation ./crates/py`, or with the built
shared library copied next to this file as `fracpme.so`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fracpme  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    close(fracpme.nu_sigma(0.7), 0.7 * fracpme.mu_sigma(0.7), 1e-15)
    close(fracpme.mu_sigma(1.0), 1.0, 1e-14)

    value = fracpme.frac_laplacian_pv(lambda t: math.cos(2.0 * t), 0.0, 1.0)
    close(value, 2.0, 1e-6)

    csv, deviations = fracpme.run_sigma_table()
    assert not deviations, deviations
    assert "1.0000,0.1250,0.1260,1.0340,0.9660" in csv

    p = fracpme.select_scheme_params(0.25, "optimal")
    assert (p.c, p.d) == (4, 4) and p.stencil == (4, 4)
    assert fracpme.select_scheme_params(1.0, "minimal:0.1").d is None

    cfg = fracpme.SolverConfig(0.5, 2.0, 4.0, 4.0, 0.25, 32, 16, 1, initial_data="bump(1, 1.5)")
    cfg.nt = cfg.min_steps()
    tr = fracpme.march(cfg, snapshots=[0.0, 0.25])
    assert len(tr.snapshots()) == 2
    for _, rows in tr.snapshots():
        top = max(max(r) for r in rows)
        assert top <= tr.b_max + 1e-10 and min(min(r) for r in rows) >= -1e-10
    assert tr.trace_csv() == fracpme.march(cfg, snapshots=[0.0, 0.25]).trace_csv()

    op = fracpme.ExtensionOperator(1.0, 8, 8, 0.5)
    assert op.is_monotone()
    w = op.solve([1.0] * 7)
    assert all(0.0 <= v <= 1.0 for v in w)

    try:
        fracpme.SolverConfig(2.5, 1.0, 4.0, 4.0, 0.1, 32, 16, 10)
    except ValueError:
        pass
    else:
        raise AssertionError("sigma out of range accepted")

    report = fracpme.run_convergence(1.0, 1.0, "optimal", 3)
    assert report.errors_strictly_decreasing(), report.errors
    assert report.reference == "spectral"

    checks = fracpme.run_validate()
    assert all(c[3] for c in checks), checks
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
