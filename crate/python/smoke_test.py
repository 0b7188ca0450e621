"""Smoke test for the pybdtk extension module.

Build first with `cargo build -p bdtk-py` and point PYBDTK_LIB at the
directory holding pybdtk.so (defaults to this directory).
"""

import json
import os
import sys

sys.path.insert(0, os.environ.get("PYBDTK_LIB", os.path.dirname(os.path.abspath(__file__))))

import pybdtk  # noqa: E402

S = "2:inf"


def close(x, y, tol=1e-9):
    return abs(x - y) <= tol


def main():
    v = pybdtk.Bd.shift(S, 1)
    vs = v.adjoint()
    assert v * vs == pybdtk.Bd.one(S)
    assert pybdtk.Bd.from_json(v.to_json()) == v

    lo, hi = (v + vs).norm()
    assert lo <= 2.0 <= hi and close(hi, 2.0)

    # T(V)T(V*) - 1 is minus the projection onto the first basis vector.
    c = pybdtk.correction(v, vs)
    assert json.loads(c.to_json())["entries"] == [[0, 0, [-1, 1, 0, 1]]]

    t = v.toeplitz()
    assert t.tau() == v
    assert t.index() == -1
    assert (t * vs.toeplitz()).truncate(3)[0][0] == (0.0, 0.0)

    two = pybdtk.Bd.one(S) + pybdtk.Bd.one(S)
    inv, res = (two + v).invert(1e-10)
    assert res <= 1e-10
    bands = dict((n, f) for n, f in json.loads(inv.to_json())["bands"])
    assert 0 in bands and -1 not in bands

    assert not pybdtk.gs_contains(1, 9, "2:inf,3:1")
    assert pybdtk.gs_sum((1, 3), (-1, 4), "2:inf,3:1") == (1, 12)

    try:
        pybdtk.Bd.from_json("{not json")
    except ValueError:
        pass
    else:
        raise AssertionError("bad JSON accepted")

    report = json.loads(pybdtk.verify("generator-relations", seed=3, cases=10))
    assert report["summary"]["failed"] == 0, report["summary"]
    print("pybdtk smoke test passed")


if __name__ == "__main__":
    main()
