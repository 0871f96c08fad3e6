"""Atoms of the phi0 = 0, pi and pi/2 measures at q = 2, checked against exact moments."""

import math

import numpy as np

from qmoment import ExtensionParam, SeriesContext, build_measure, moments_exact, verify_measure

ctx = SeriesContext.for_q(2.0)
exact = np.array([float(v) for v in moments_exact(ctx.basis, 12)])

for ph in (0.0, math.pi, math.pi / 2):
    m = build_measure(ctx, ExtensionParam(ph))
    v = verify_measure(ctx, m)
    print(f"phi0 = {ph:.4f}: {len(m.atoms)} atoms, total mass {m.total_mass:.16f}")
    for a in m.atoms:
        if abs(a.x) < 40:
            print(f"   x = {a.x:+20.14f}   mass = {a.mass:.14e}")
    print(f"   s_12 = {m.moments(12)[12]:.10f} (exact {exact[12]:.10f})")
    print(f"   orthonormality residual {v['ortho_residual_max']:.1e}, "
          f"mass-method spread {m.max_method_spread():.1e}")
