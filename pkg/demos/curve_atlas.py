"""Walk the four bifurcation curves and the codim-2 points that anchor them.

Prints a compact table of curve samples at a few cross-term values R and
certifies every printed row against the multiplier identities.
"""

import numpy as np

from ghmlab import (
    GhmParams,
    designated_fixed_point,
    multipliers_at,
    organizing_points,
    trace_curves,
    validate_sample,
)

for R in (-0.1, 0.0, 0.1):
    bt, ht = organizing_points(R)
    print(f"R = {R:+.2f}:  BT = ({bt.M:+.6f}, {bt.B:+.6f})   HT = ({ht.M:+.6f}, {ht.B:+.6f})")
print()

samples = trace_curves(0.1, 9)
for s in samples:
    validate_sample(s)  # raises if any identity is off

print("curve      param        M            B        |mult - target|")
for s in samples:
    x = designated_fixed_point(s)
    m1, m2 = multipliers_at(GhmParams(s.M, s.B, s.R), x)
    if s.curve_id == "Lplus":
        err = min(abs(m1 - 1), abs(m2 - 1))
    elif s.curve_id == "Lminus":
        err = min(abs(m1 + 1), abs(m2 + 1))
    elif s.curve_id == "Lphi":
        err = abs(m1 - np.exp(1j * s.parameter))
    else:
        err = abs(m1 * m2 - 1)  # neutral saddle: product exactly 1
    print(f"{s.curve_id:<9} {s.parameter:+8.4f}  {s.M:+11.6f}  {s.B:+11.6f}   {err:.2e}")

# the circle-birth curve terminates on the fold and flip curves at the
# codim-2 points; check the endpoint gap shrinks with the angle
from ghmlab import curve_L_phi  # noqa: E402

bt, ht = organizing_points(0.1)
print()
for eps in (1e-2, 1e-4, 1e-6):
    M0, B0 = curve_L_phi(eps, 0.1)
    M1, B1 = curve_L_phi(np.pi - eps, 0.1)
    d_bt = max(abs(M0 - bt.M), abs(B0 - bt.B))
    d_ht = max(abs(M1 - ht.M), abs(B1 - ht.B))
    print(f"omega offset {eps:.0e}: gap to BT {d_bt:.3e}, gap to HT {d_ht:.3e}")
