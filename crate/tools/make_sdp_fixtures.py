#!/usr/bin/env python3
"""Solve the dumped toy SDP instances with an interior-point solver and pin
the optimal objectives as test fixtures.

Usage:
    cargo run --example dump_sdp_instances -- /tmp/sdp_instances
    python3 tools/make_sdp_fixtures.py /tmp/sdp_instances \
        crates/nearfield/tests/fixtures/sdp_reference.json
"""

import json
import sys
from pathlib import Path

import cvxpy as cp
import numpy as np


def load_cvec(raw, shape):
    arr = np.array([complex(re, im) for re, im in raw])
    return arr.reshape(shape)


def toeplitz_expr(u, n):
    """Hermitian Toeplitz matrix with first column u (u[0] constrained real)."""
    term = []
    eye = np.eye(n)
    for k in range(n):
        shift = np.eye(n, k=-k)  # ones on the k-th subdiagonal
        if k == 0:
            term.append(cp.real(u[0]) * eye)
        else:
            term.append(u[k] * shift + cp.conj(u[k]) * shift.T)
    return sum(term)


def solve_denoise(doc):
    n, p, m = doc["n"], doc["p"], doc["m"]
    a = load_cvec(doc["a"], (m, n))
    g = load_cvec(doc["g"], (n, p))
    y = load_cvec(doc["y"], (m,))
    tau = doc["tau"]

    x = cp.Variable((p, n), complex=True)
    u = cp.Variable(n, complex=True)
    v = cp.Variable((p, p), hermitian=True)
    t = toeplitz_expr(u, n)
    # [P(X)]_k = G[k, :] @ X[:, k] (no conjugation)
    px = cp.hstack([g[k, :] @ x[:, k] for k in range(n)])
    fit = 0.5 * cp.sum_squares(y - a @ px)
    reg = tau * (cp.real(cp.trace(t)) / (2 * n) + 0.5 * cp.real(cp.trace(v)))
    block = cp.bmat([[t, cp.conj(x.T)], [x, v]])
    prob = cp.Problem(
        cp.Minimize(fit + reg),
        [block >> 0, cp.imag(u[0]) == 0],
    )
    val = prob.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-11,
        tol_gap_rel=1e-11,
        tol_feas=1e-11,
        max_iter=500,
    )
    return val, prob.status


def solve_atomic(doc):
    p, n = doc["p"], doc["n"]
    x0 = load_cvec(doc["x0"], (p, n))
    u = cp.Variable(n, complex=True)
    v = cp.Variable((p, p), hermitian=True)
    t = toeplitz_expr(u, n)
    block = cp.bmat([[t, np.conj(x0.T)], [x0, v]])
    prob = cp.Problem(
        cp.Minimize(cp.real(cp.trace(t)) / (2 * n) + 0.5 * cp.real(cp.trace(v))),
        [block >> 0, cp.imag(u[0]) == 0],
    )
    val = prob.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-11,
        tol_gap_rel=1e-11,
        tol_feas=1e-11,
        max_iter=500,
    )
    return val, prob.status


def main():
    src = Path(sys.argv[1])
    dst = Path(sys.argv[2])
    fixtures = {"denoise": [], "atomic_norm": []}
    for path in sorted(src.glob("*.json")):
        doc = json.loads(path.read_text())
        if doc["kind"] == "denoise":
            val, status = solve_denoise(doc)
            print(f"{path.name}: {status} objective {val:.12e}")
            fixtures["denoise"].append(
                {"index": doc["index"], "objective": val, "status": status}
            )
        else:
            val, status = solve_atomic(doc)
            print(
                f"{path.name}: {status} objective {val:.12e} "
                f"(closed form {doc['expected']})"
            )
            fixtures["atomic_norm"].append(
                {
                    "index": doc["index"],
                    "objective": val,
                    "expected": doc["expected"],
                    "status": status,
                }
            )
    fixtures["solver"] = "clarabel via cvxpy"
    fixtures["cvxpy_version"] = cp.__version__
    dst.parent.mkdir(parents=True, exist_ok=True)
    dst.write_text(json.dumps(fixtures, indent=2) + "\n")
    print(f"wrote {dst}")


if __name__ == "__main__":
    main()
