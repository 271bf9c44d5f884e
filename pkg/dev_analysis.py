import time

import numpy as np

from sewkit.metric import FiniteMetricSpace, Subset, diam, mesh, restrict
from sewkit.generators import (
    carpet_net,
    circle_net,
    disk_net,
    interval_net,
    snowflake,
)
from sewkit import analysis as an

t0 = time.time()

# bounded turning: circle, segment, U-shape
c24 = circle_net(24)
bt = an.bounded_turning(c24)
print(f"circle_net(24) BT: {bt:.4f} (expect ~1, tol 2*mesh/diam={2*mesh(c24)/diam(c24):.3f})")

seg = interval_net(32)
print(f"interval_net(32) BT: {an.bounded_turning(seg):.4f} (expect 1)")

# U-shape: two unit segments 0.25 apart joined at one end by a short bend
m = 16
xs = np.arange(m + 1) / m
top = np.stack([xs, np.full(m + 1, 0.25)], 1)
bot = np.stack([xs, np.zeros(m + 1)], 1)
bend = np.array([[1.0, 1 / 16], [1.0, 2 / 16], [1.0, 3 / 16]])
pts = np.concatenate([top, bot, bend])
d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
u = FiniteMetricSpace(d)
btu = an.bounded_turning(u, 3 / 16)
print(f"U-shape BT: {btu:.4f} (expect ~sqrt(17)={np.sqrt(17):.4f} +/- 10%)")

# llc: circle <= 1.25; two clusters fail
print(f"circle_net(24) LLC: {an.llc_check(c24):.4f} (expect <= 1.25)")
# two clusters 1 apart, connected only through a 60-unit detour
bridge = [(0.05 + 0.5 * i, 0.0) for i in range(1, 61)]
back = [(30.05, 0.5), (30.05, 1.0)]
ret = [(30.05 - 0.5 * i, 1.0) for i in range(1, 61)]
pts2 = np.array([(0, 0), (0.05, 0)] + bridge + back + ret + [(0.05, 1), (0, 1)])
d2 = np.sqrt(((pts2[:, None, :] - pts2[None, :, :]) ** 2).sum(-1))
rep = an.llc_check_report(FiniteMetricSpace(d2), 0.6)
print(f"two clusters LLC: {rep.constants['lambda']} passed={rep.passed} witness={rep.witnesses}")

# doubling
print(f"interval_net(64) doubling: {an.doubling_constant(interval_net(64))} (expect <= 3)")
one = FiniteMetricSpace(np.zeros((1, 1)))
print(f"single point doubling: {an.doubling_constant(one)} (expect 1)")

# porosity: circle inside disk_net(6)
dsp, bnd = disk_net(6)
pr = an.porosity(dsp, bnd)
print(f"disk_net(6) rim porosity: {pr:.4f} (expect >= 0.2)")
full = an.porosity(dsp, Subset(dsp, np.arange(dsp.n)))
print(f"whole-space porosity: {full} (expect 0)")

# angle examples
a_pts = np.array([[i, 0] for i in range(9)], float) / 8
b_pts = np.array([[0, i] for i in range(1, 9)], float) / 8
pts = np.concatenate([a_pts, b_pts])
d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
perp = FiniteMetricSpace(d)
A = Subset(perp, np.arange(9))
B = Subset(perp, np.concatenate([[0], np.arange(9, 17)]))
ang = an.angle(perp, A, B)
print(f"perpendicular angle: {ang:.4f} (expect 1/sqrt2={1/np.sqrt(2):.4f} +/- 2*mesh={2*mesh(perp):.3f})")
print(f"A=B angle: {an.angle(perp, A, A)} (expect 1)")
# abutting collinear segments
line = interval_net(16)
A2 = Subset(line, np.arange(9))
B2 = Subset(line, np.arange(8, 17))
print(f"collinear angle: {an.angle(line, A2, B2)} (expect 1)")

# uniform perfectness
print(f"circle_net(32) perfectness: {an.uniform_perfectness(circle_net(32), Subset(circle_net(32), np.arange(32))):.4f} (expect <= 2)")
iv64 = interval_net(64)
print(f"interval_net(64) perfectness: {an.uniform_perfectness(iv64, Subset(iv64, np.arange(65))):.4f} (expect <= 2)")
twop = an.uniform_perfectness_report(iv64, Subset(iv64, np.array([0, 64])))
print(f"two-point perfectness: {twop.constants['lambda']} passed={twop.passed}")

# ahlfors
iv = interval_net(256)
Q, cl, ch = an.ahlfors_dimension(iv)
print(f"interval_net(256) Q: {Q:.4f} (expect 1.0 +/- 0.05)  C=[{cl:.3f},{ch:.3f}]")
iv4k = interval_net(4096)
Qb, *_ = an.ahlfors_dimension(iv4k)
sn = snowflake(iv4k, 0.5)
Qs, *_ = an.ahlfors_dimension(sn)
print(f"interval_net(4096) Q: {Qb:.4f}; snowflaked Q: {Qs:.4f} (expect ~2*Qb={2*Qb:.3f} +/- 0.1)")

t1 = time.time()
print(f"-- small examples {t1-t0:.1f}s --")

c3, peri = carpet_net(3)
Q3, cl3, ch3 = an.ahlfors_dimension(c3)
print(f"carpet_net(3) Q: {Q3:.4f}  C=[{cl3:.3f},{ch3:.3f}] (target 1.893)")
nd = an.relative_doubling(c3, peri[:-1], 0.5)
print(f"carpet_net(3) relative doubling (inner holes): {nd}")
eps3 = max(3 * mesh(c3), an.connectivity_threshold(c3))
pX, r0 = an.relative_porosity(c3, peri[:-1], eps3)
print(f"carpet_net(3) relative porosity: p_X={pX:.4f} r_0={r0:.4f}")
t2 = time.time()
print(f"-- carpet_net(3) {t2-t1:.1f}s --")
