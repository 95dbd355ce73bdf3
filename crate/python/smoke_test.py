#!/usr/bin/env python3
"""Smoke test for the cvp2p_py extension module.

Builds are picked up from the cargo target directory; run

    cargo build -p cvp2p-py --release
    python3 python/smoke_test.py

(or `maturin develop` inside crates/py and plain `import cvp2p_py`).
"""

import math
import shutil
import sys
import sysconfig
import tempfile
from pathlib import Path


def load_module():
    try:
        import cvp2p_py  # installed via maturin

        return cvp2p_py
    except ImportError:
        pass
    root = Path(__file__).resolve().parent.parent
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    candidates = [
        root / "target" / profile / "libcvp2p_py.so" for profile in ("release", "debug")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p cvp2p-py --release")
    stage = Path(tempfile.mkdtemp(prefix="cvp2p_py_"))
    shutil.copy(built, stage / f"cvp2p_py{suffix}")
    sys.path.insert(0, str(stage))
    import cvp2p_py

    return cvp2p_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    m = load_module()
    print(f"cvp2p_py {m.__version__}")

    hexa = m.Lattice.hexagonal()
    approx(hexa.skew, 0.5)
    approx(hexa.cell_height, math.sin(math.pi / 3))

    # Entropy and the hexagonal strip distribution.
    approx(m.entropy_bits([0.5, 0.5]), 1.0)
    q = hexa.infinite_round_quantities()
    approx(q["rate_bits"], 2.4182958340544896)
    approx(q["rounds"], 4.0 / 3.0)
    approx(q["q"][1], 2.0 / 3.0)

    # Decoders: Babai and exact CVP disagree inside the corner triangles.
    (u_b, _), (u_n, y_n) = hexa.babai(0.45, 0.42), hexa.nearest(0.45, 0.42)
    assert u_b == (0, 0) and u_n == (0, 1), (u_b, u_n)
    approx(y_n[0], 0.5)
    assert hexa.voronoi_contains(0.45, 0.42, (0, 1))
    assert not hexa.voronoi_contains(0.45, 0.42, (0, 0))

    # Geometry closed forms.
    geom = hexa.cell_geometry()
    approx(geom["l0"], 0.5)
    approx(geom["heights"][3], 0.28867513459481287)
    lower, upper = hexa.boundary(0.4)
    approx(upper, 0.6 / math.sqrt(3))

    # A protocol run with exact bit accounting.
    t = hexa.run_protocol(0.45, 0.42, order="inf")
    assert t["decode_u"] == (0, 1)
    approx(t["total_bits"], math.log2(6) + 4.0)

    # Zero-error Monte Carlo; rate agrees with the closed form.
    stats = hexa.estimate_infinite_round(samples=20000, seed=7)
    assert stats["errors"] == 0
    assert abs(stats["rate"] - q["rate_bits"]) < 4 * stats["rate_stderr"]

    # Single-round scheme at a rate target.
    sr = hexa.estimate_error_prob("12", samples=20000, seed=11, rate=5.0)
    assert sr["pe_exact"] > 0
    assert abs(sr["pe"] - sr["pe_exact"]) < 5 * max(sr["pe_stderr"], 1e-4)

    # The square lattice needs no Stage-II bits at all.
    sq = m.Lattice.square()
    assert sq.is_rectangular()
    t = sq.run_protocol(0.3, -0.4, order="inf")
    assert t["total_bits"] == 0.0 and t["rounds"] == 1

    approx(m.stage1_rate_limit(2 ** -4, 0.0, 0.0), 8.0)

    print("smoke test passed")


if __name__ == "__main__":
    main()
