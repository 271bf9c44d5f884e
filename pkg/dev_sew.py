import time

import numpy as np

from sewkit.generators import (
    GluingComponent,
    ScenarioBundle,
    Subset,
    carpet_with_disks,
    circle_net,
    disk_net,
)
from sewkit.sewing import (
    build_quasimetric,
    component_census,
    nearest_seam_check,
    normalize_gluing,
    sew,
    verify_ba_contract,
    verify_flatness,
    flatness_report,
)
from sewkit.metric import default_epsilon, diam, FiniteMetricSpace
from sewkit.maps import PowerLawEta

# --- toy: unit-circle 4-net base, filling = same 4 points plus center ---
base = circle_net(4)
filling, bd = disk_net(1, boundary_count=4, radius=1.0)
psi = bd.indices.copy()
comp = GluingComponent(
    Subset(base, np.arange(4)),
    filling,
    bd,
    psi,
    L=1.0,
    cycle=np.arange(4, dtype=np.int64),
)
bundle = ScenarioBundle(base, (comp,))
bundle.validate()
sewn = sew(bundle)
print("toy n:", sewn.n, "(expect 5)")
print("toy L:", sewn.certificates.L, "(expect 1.0 exact)")
print("toy exact d == q:", np.array_equal(sewn.space.dist, sewn.q.q))
print("toy d(center, base):", sewn.space.dist[4, :4], "(expect all 1)")
print("toy c_flat:", sewn.certificates.c_flat, "(expect 1.0 exact)")
print("toy Delta:", sewn.certificates.Delta)
rep = nearest_seam_check(sewn)
print("toy nearest seam ok:", rep.ok, "checked:", rep.checked)
cen = component_census(sewn, default_epsilon(sewn.space))
print("toy census ok:", cen.ok, "entries:", len(cen.entries))

# ba contract sanity: d_hat = 2 d
d_hat = filling.scaled(2.0)
ba = verify_ba_contract(filling, comp.boundary, psi, d_hat, eta=PowerLawEta(2.0, 1.0))
print("ba C (expect 1):", ba.local_similarity, "seam L (expect 2):", ba.seam_bilipschitz,
      "diam ratio (expect 2):", ba.diam_ratio, "hyp:", ba.hypothesis_ok, "finite:", ba.finite)

# --- carpet with disks, level 1 and 2 ---
for lvl in (1, 2):
    t0 = time.time()
    cwd = carpet_with_disks(lvl)
    t1 = time.time()
    sewn = sew(cwd)
    t2 = time.time()
    c = sewn.certificates
    print(f"cwd({lvl}): n={sewn.n} L={c.L:.6f} c_flat={c.c_flat:.6f} "
          f"Delta={c.Delta:.6f} gen={t1-t0:.1f}s sew={t2-t1:.1f}s")
    rep = nearest_seam_check(sewn)
    print(f"  nearest seam ok: {rep.ok} ({rep.checked} interiors)")
    cen = component_census(sewn, default_epsilon(sewn.space))
    print(f"  census ok: {cen.ok} entries={len(cen.entries)} expect={len(cen.expected)}")
    fr = flatness_report(sewn)
    print(f"  flatness detail: c_base={fr[1]} c_cross={fr[2]}")
