"""Smoke test for the `bzl` Python extension.

Build and install the module first, e.g.

    maturin build --release -m crates/py/Cargo.toml -o target/wheels
    pip install --force-reinstall target/wheels/bzl-*.whl
    python python/smoke_test.py
"""

import math
import sys

import bzl


def check(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}{': ' + detail if detail else ''}")
    return ok


def main():
    results = []

    m = bzl.Model("model1", 0.2, 1.0, 0.7)
    h = m.bloch_hamiltonian(math.pi)
    results.append(check("Bloch matrix", abs(h[0][1] - 0.6) < 1e-12 and abs(h[0][0] - 0.7j) < 1e-12, repr(m)))
    results.append(check("PT threshold", abs(m.pt_threshold() - 0.6) < 1e-12))

    r = bzl.theta_exact(m, 0.2)
    results.append(check("complex theta above threshold", r.theta.imag > 0, f"theta = {r.theta:.6g}"))
    real = bzl.theta_exact(m.with_delta(0.4), 0.2)
    results.append(check("real theta below threshold", abs(real.theta.imag) < 1e-6))

    eigs = bzl.ws_ladder_eigenvalues(bzl.Model("rice-mele", 0.4, 1.0, 0.7), 0.2, n_cells=80)
    results.append(check("dense eigenvalues", len(eigs) == 160))

    curve = bzl.sweep_delta(bzl.Model("rice-mele", 0.4, 1.0), 0.2, 0.0, 1.2, 61, with_wkb=False)
    results.append(check("Rice-Mele sweep is smooth", curve.classification == "smooth", f"transition {curve.transition:.3f}"))

    traj = bzl.evolve(bzl.Model("rice-mele", 0.4, 1.0, 0.7), 0.2)
    kind, mismatch = traj.classify()
    results.append(check("periodic Bloch-Zener dynamics", kind == "periodic", f"mismatch {mismatch:.2e}"))

    w = bzl.Walk(math.pi / 2 - 0.1, math.pi / 2 - 0.15, 0.06, 61)
    results.append(check("flat walk bands", w.band_spread() < 1e-8))
    wt = bzl.qw_evolve(w, steps=610)
    results.append(check("walk recurrence periodic", wt.classify()[0] == "periodic"))
    results.append(check("walk threshold", abs(bzl.qw_pt_threshold(w.beta1, w.beta2) - 0.0504) < 1e-3))

    try:
        bzl.Model("model1", 0.2, 1.0, -1.0)
        results.append(check("invalid input raises ValueError", False))
    except ValueError:
        results.append(check("invalid input raises ValueError", True))

    try:
        bzl.evolve(bzl.Model("model1", 0.2, 1.0, 0.0), 0.2, n_cells=16)
        results.append(check("boundary guard raises", False))
    except bzl.NumericalGuardError:
        results.append(check("boundary guard raises", True))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
