"""Gauss rules of growing sections converge to the phi0 = 0 and pi atoms (even / odd N)."""

import math

import numpy as np

from qmoment import ExtensionParam, SeriesContext, build_measure, eigen_quadrature, truncate

ctx = SeriesContext.for_q(2.0)
for ph, parity in ((0.0, 0), (math.pi, 1)):
    m = build_measure(ctx, ExtensionParam(ph))
    x0 = m.x[m.x > 0][1]
    print(f"phi0 = {ph:.4f}, atom at {x0:.14f}")
    for N in (10, 20, 40, 80):
        rule = eigen_quadrature(truncate(ctx.basis, N + parity))
        j = np.argmin(np.abs(rule.nodes - x0))
        print(f"   N = {N + parity:3d}: node gap {abs(rule.nodes[j] - x0):.1e}")
