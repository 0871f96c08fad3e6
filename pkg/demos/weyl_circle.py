"""Limit circle at z = i for a few q, and where each extension lands on it."""

import math

import numpy as np

from qmoment import ExtensionParam, SeriesContext, m_at_i, master_identity, weyl_disk

for q in (0.3, 2.0, 5.0):
    ctx = SeriesContext.for_q(q)
    d = weyl_disk(ctx)
    print(f"q = {q}:  W - 1 = {float(master_identity(ctx)) - 1:+.1e}")
    print(f"  center {d.center.imag:.15f} i   radius {d.radius:.6e}")
    print(f"  direct sums agree to {abs(d.radius - d.radius_direct) / d.radius:.1e}")
    for ph in np.linspace(0, 2 * math.pi, 5)[:-1]:
        m = complex(m_at_i(ctx, ExtensionParam(ph)))
        print(f"    phi0 = {ph:5.3f}  m(i) = {m.real:+.6f} {m.imag:+.6f} i")
