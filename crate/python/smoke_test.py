"""Smoke test for the rfk_lab extension module.

Build and install it first:  pip install --no-build-isolation -e crates/py
"""

import math

import rfk_lab


def main():
    # disk with Dirichlet boundary: j_{0,1}^2
    disk = rfk_lab.radial_solve(0.0, 1.0, 0.0, math.inf)
    assert abs(disk.lambda1 - 5.783185962946784) < 1e-6, disk.lambda1

    ann = rfk_lab.radial_solve(1.0, 2.0, 1.0, 1.0)
    assert ann.sigma is not None and 1.0 < ann.sigma < 2.0
    print(f"annulus (1, 1): lambda1 = {ann.lambda1:.8f}, sigma = {ann.sigma:.6f}")

    dom = rfk_lab.Domain.annulus(1.0, 2.0)
    fem = rfk_lab.fem_solve(dom, 1.0, 1.0)
    assert abs(fem.lambda1 - ann.lambda1) / ann.lambda1 < 1e-2
    assert len(fem.x) == len(fem.u) and max(fem.u) == 1.0
    print(f"fem (1, 1): lambda1 = {fem.lambda1:.8f} on {len(fem.x)} nodes")

    ecc = rfk_lab.Domain.eccentric(1.0, 2.0, 0.3, 0.0)
    r, big_r = ecc.match_annulus(1.0, 0.0)
    lam_d = rfk_lab.fem_solve(ecc, 1.0, 0.0).lambda1
    lam_a = rfk_lab.radial_solve(r, big_r, 1.0, 0.0).lambda1
    assert lam_d <= lam_a * 1.02
    print(f"eccentric (1, 0): {lam_d:.6f} <= {lam_a:.6f}")

    prof = rfk_lab.parallel_profile(dom, "inner", 512)
    assert prof.nagy_violations == 0
    assert abs(prof.area_integral - dom.area()) / dom.area() < 1e-2

    flow = rfk_lab.flow_decomposition(dom, 1.0, 1.0, 128, 32, 96)
    assert flow.cut_components == 1
    assert abs(flow.quotient_in - flow.lambda1) / flow.lambda1 < 2e-2

    try:
        dom.match_annulus(1.0, -1.0)
    except ValueError as e:
        print(f"mixed signs rejected: {e}")
    else:
        raise AssertionError("mixed-sign regime accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
