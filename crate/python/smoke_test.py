"""Smoke test for the gapmm_py extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/gapmm_py-*.whl
then run ``python python/smoke_test.py``.
"""

import math

import numpy as np

import gapmm_py as g


def check_eigen():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((12, 12))
    m = x + x.T
    vals, vecs = g.eig(m.tolist())
    assert np.allclose(vals, np.linalg.eigvalsh(m), atol=1e-12)
    v = np.array(vecs)
    assert np.allclose(v.T @ v, np.eye(12), atol=1e-12)
    assert np.allclose(g.eigvals(m.tolist()), vals)
    back = g.read_matrix(g.write_matrix(m.tolist()))
    assert np.array_equal(np.array(back), m)


def check_two_by_two():
    # off-diagonal coupling of +1 and -1: the upper eigenvalue is sqrt(1 + t^2)
    t = 0.75
    inst = g.Instance([[1.0, 0.0], [0.0, -1.0]], [[0.0, t], [t, 0.0]], gamma=0.0, c=-1.0, d=1.0)
    r = g.check("thm1.4", inst, trials=50)
    assert r["applicable"] and r["passed"], r
    mm = r["minimax"][0]
    assert abs(mm["direct"] - math.sqrt(1 + t * t)) < 1e-14
    alone = g.minimax(inst.a, inst.b, 0.0, 1, trials=50)
    assert abs(alone["attained"] - mm["direct"]) < 1e-12


def check_generated():
    for thm, kind in [("thm1.2", "bounded-pert"), ("thm1.4", "offdiag-op"), ("thm1.5", "offdiag-form")]:
        for inst in g.batch(kind, 3, seed=11, dims=(10, 20)):
            r = g.check(thm, inst, trials=30)
            assert r["applicable"] and r["passed"], (thm, inst, [c for c in r["conclusions"] if c["holds"] is False])
    inst = g.generate("bounded-pert", 20, seed=1)
    assert inst.margins["norm_condition"] > 0
    assert g.generate("bounded-pert", 20, seed=1).a == inst.a
    manifest, a_text, _ = inst.to_files()
    assert '"bounded-pert"' in manifest and a_text.startswith("20\n")


def check_stokes():
    r = g.stokes(1, 16, nu=1.0, vstar=0.3)
    assert r["passed"]
    assert abs(r["c_h"] - 1.0) < 1e-10
    for row in r["rows"]:
        assert row["lower"] <= row["value"] + 1e-8 <= row["upper"] + 2e-8
    # first Dirichlet eigenvalue of the 1D Laplacian on 16 interior points
    h = 1.0 / 17
    lam1 = 4.0 / h**2 * math.sin(math.pi * h / 2) ** 2
    assert abs(r["rows"][0]["lower"] - lam1) < 1e-9


def check_appendix():
    rng = np.random.default_rng(3)
    x, y = rng.standard_normal((5, 5)), rng.standard_normal((4, 4))
    l1, l2 = x @ x.T + np.eye(5), y @ y.T + np.eye(4)
    s = rng.standard_normal((4, 5))
    h = g.heinz(l1.tolist(), l2.tolist(), s.tolist())
    assert h["passed"] and len(h["rows"]) == 11
    c = np.linalg.norm(l2 @ s @ np.linalg.inv(l1), 2)
    assert abs(h["c"] - c) < 1e-9 * c
    k = rng.standard_normal((5, 5))
    f = g.form_sum(l1.tolist(), (k + k.T).tolist())
    assert max(f["operator_residual"], f["form_residual"]) <= 1e-9 * f["scale"]


def check_errors():
    for bad in (lambda: g.eigvals([[1.0, 2.0, 3.0], [0.0, 1.0, 2.0]]),
                lambda: g.eigvals([[1.0, 2.0], [0.0]]),
                lambda: g.generate("nope", 10, 1),
                lambda: g.read_matrix("2\n1 0\n0 x\n"),
                lambda: g.stokes(2, 40)):
        try:
            bad()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")
    assert g.tolerances()["minimax"] == 1e-7


if __name__ == "__main__":
    for f in (check_eigen, check_two_by_two, check_generated, check_stokes, check_appendix, check_errors):
        f()
        print(f"ok  {f.__name__}")
    print(f"gapmm_py {g.__version__}: all smoke checks passed")
