"""Smoke test for the zsb_py extension.

Build with `pip install --no-build-isolation -e crates/zsb-py`, then run
`python python/smoke_test.py`.
"""

import cmath
import math
from pathlib import Path

import zsb_py as z

DATA = Path(__file__).resolve().parents[1] / "crates" / "zsb" / "data" / "potentials"


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    zero = z.Potential.zero()
    for lam in (0.3, 2.0 + 0.5j, -7.1):
        t = z.transfer(zero, lam)
        close(t["delta"], 2 * cmath.cos(lam), 1e-12)
        close(t["det"], 1.0, 1e-12)

    sp = z.Spectrum(zero, 4)
    for n, lam in zip(range(-4, 5), sp.lam_plus):
        close(lam, n * math.pi, 1e-10)
    assert sp.open_gaps == []

    phi = z.Potential.load(DATA / "er_two_mode.json")
    assert phi.is_er() and phi.is_real_type()
    sp = z.Spectrum(phi, 16)
    assert sp.open_gaps, "expected open gaps"
    acts = sp.actions([1, 2])
    for a in acts:
        assert a["discrepancy"] < 1e-9, a

    fs = sp.frequencies([1, 2])
    for n, w in zip(fs["ns"], fs["omega_sharp"]):
        close(complex(*w) / (2 * n * math.pi) ** 3, 1.0, 0.05)

    h = phi.hamiltonians()
    fit = sp.laurent()
    close(complex(*fit["h"][0]), h[0], 1e-8)

    u, samples = z.evolve(phi, 1e-3, grid=128, dt=1e-4, sample_every=5)
    assert len(u) == 128
    close(samples[-1]["l2"], samples[0]["l2"], 1e-10)

    rep = z.shift_check(phi, 1e-3, grid=128, dt=1e-4)
    assert rep["residual"] < 1e-10 < rep["residual_opposite"], rep

    try:
        z.Potential.from_json('{"kind": "nope"}')
    except z.ZsbError:
        pass
    else:
        raise AssertionError("bad JSON accepted")

    for cid, ok, detail in z.validate([1, 8]):
        assert ok, (cid, detail)

    print("smoke test ok")


if __name__ == "__main__":
    main()
