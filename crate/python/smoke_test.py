"""Smoke test for the Python bindings.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`
or `pip install ./crates/py`.
"""

import math

import liouville


def main():
    mesh = liouville.Mesh(h=0.1)
    print(mesh)
    assert mesh.num_nodes > 100 and len(mesh.triangles()) == mesh.num_triangles
    assert abs(mesh.area - math.pi) < 2e-2
    slack = mesh.slack()
    assert 0 < slack < 1e-2

    fine = mesh.refine()
    assert fine.num_triangles == 4 * mesh.num_triangles
    again = liouville.Mesh.from_json(mesh.to_json())
    assert again.digest() == mesh.digest()

    # closed-form bubble mass 8π λ²R² / (8 + λ²R²)
    b1 = liouville.Bubble(1.0)
    assert abs(b1.mass(1.0) - 8 * math.pi / 9) < 1e-12
    b2 = b1.pair(1.0)
    assert abs(b1.value(1.0) - b2.value(1.0)) < 1e-12
    assert abs(b1.mass(1.0) + b2.mass(1.0) - 8 * math.pi) < 1e-12
    rep = liouville.sci_check_bubbles(b1, b2, 1.0)
    assert rep["verdict"] == "consistent", rep

    gelfand = {"variant": {"kind": "gelfand", "rho": 1.0}}
    sol = liouville.solve(gelfand, mesh)
    assert sol.converged and sol.fields[0].sup_norm() > 0
    print("gelfand rho=1: u(0) =", sol.fields[0].eval(0.0, 0.0), sol.summary()["masses"])
    # a discrete solution of -Δu = e^u is a subsolution, so Bol applies
    rep = liouville.bol_check(sol.fields[0], slack=slack)
    print("bol", rep["verdict"], rep["margins"])
    assert rep["verdict"] == "consistent"

    signed = {"variant": {"kind": "sinh-gordon-signed", "rho": 0.9 * 4 * math.pi, "a": 1.0}}
    sols, starts = liouville.multi_start(signed, mesh, starts=6, seed=3)
    assert len(starts) == 6
    assert len(sols) == 1 and sols[0].sup_norm() < 1e-8

    rep = liouville.uniqueness(signed, mesh, starts=6, slack=slack)
    print("uniqueness", rep["theorem"], rep["verdict"])
    assert rep["verdict"] == "consistent"

    try:
        liouville.solve({"variant": {"kind": "toda", "a": 2.0, "a_prime": 1.0, "b": 1.0, "b_prime": 1.0}}, mesh)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("unequal Toda sums must be rejected")

    outcomes = liouville.run_suite(target_h=0.1, refinements=0, starts=6, criteria=[1, 2])
    for o in outcomes:
        print(o["line"])
    assert [o["id"] for o in outcomes] == [1, 2] and all(o["pass"] for o in outcomes)
    print("ok")


if __name__ == "__main__":
    main()
