"""Estimate the finite-eps bias constants used by the experiment verdicts.

Density and avoidance have exact finite-eps values (closed_forms.lattice_*),
so c = max |exact - limit| / eps over eps in {0.02, 0.01} and the test points.

Backbone statistics have no exact form. They are estimated at eps and eps/2
with many replicas (seeds disjoint from the acceptance seed). Assuming
bias(eps) = c eps, the difference of the two biases is c eps/2, so

    c = 2 |bias(eps) - bias(eps/2)| / eps + 2 * stderr_of_that / eps.

They are calibrated at a fixed physical depth (t = 5) where the transient
from the full initial slice has died out.

Run:  python3 scripts/calibrate_bias.py [density|avoidance|backbone] ...
"""

import sys
import time

import numpy as np

from bnetlab import experiments as ex
from bnetlab.closed_forms import big_psi, lattice_avoidance, lattice_density, small_psi
from bnetlab.stats import dispersion_index, mean_stderr

EPS = 0.02
SEED = 12345


def exact_c(name, rows):
    worst = 0.0
    for label, eps, exact, limit in rows:
        c = abs(exact - limit) / eps
        worst = max(worst, c)
        print(f"{name} {label} eps={eps}: exact={exact:.6f} limit={limit:.6f} -> |bias|/eps={c:.4f}", flush=True)
    print(f"{name}: c = {worst:.4f}", flush=True)


def _bias_backbone(eps, reps):
    counts, per_block = ex.backbone_counts(eps, int(round(5 / eps**2)), int(round(400 / eps)), reps, SEED)
    m, se = mean_stderr(counts)
    D, se_D = dispersion_index(counts)
    return (m / per_block / (2 * eps) - 2.0, se / per_block / (2 * eps)), (D - 1.0, se_D)


def report(name, pairs):
    cs = []
    for label, (b1, s1), (b2, s2) in pairs:
        diff = abs(b1 - b2)
        se = np.hypot(s1, s2)
        c = 2 * (diff + 2 * se) / EPS
        cs.append(c)
        print(f"{name} {label}: bias({EPS})={b1:+.4f}+-{s1:.4f} bias({EPS/2})={b2:+.4f}+-{s2:.4f} -> c={c:.2f}", flush=True)
    print(f"{name}: c = {max(cs):.2f}", flush=True)


def main(which):
    t0 = time.time()
    if "density" in which:
        rows = []
        for eps in (EPS, EPS / 2):
            for t in (0.5, 1.0, 2.0):
                rows.append((f"t={t}", eps, lattice_density(eps, t), small_psi(t)))
        exact_c("density", rows)
    if "avoidance" in which:
        rows = []
        for eps in (EPS, EPS / 2):
            for gap, t in ((0.5, 1.0), (1.0, 1.0), (1.0, 2.0)):
                W = 2 * int(round(gap / (2 * eps)))
                rows.append((f"gap={gap},t={t}", eps, lattice_avoidance(eps, t, W), 1 - big_psi(W * eps, t)))
        exact_c("avoidance", rows)
    if "backbone" in which:
        a = _bias_backbone(EPS, 200)
        b = _bias_backbone(EPS / 2, 120)
        report("backbone_intensity", [("t=5", a[0], b[0])])
        report("backbone_dispersion", [("t=5", a[1], b[1])])
    print(f"elapsed {time.time() - t0:.0f}s")


if __name__ == "__main__":
    main(sys.argv[1:] or ["density", "avoidance", "backbone"])
