"""
Choosing the code rates
=======================

Grid search for the codeword rate and secrecy ratio that maximise the
effective secrecy throughput, with and without outage constraints.
"""

import numpy as np

from relaysec import Scenario
from relaysec import analytic as an

template = Scenario.build(15.0, r0=1.0, rs=0.125, lam=0.75, n_t=3, k_r=3, fd_td=0.1)
r0 = np.arange(0.25, 4.01, 0.25)
kappa = np.arange(0.05, 0.951, 0.05)



def show(label, res):
    if not res.feasible:
        print(f"{label}: infeasible ({res.evaluated} points tried)")
        return
    pt = res.point
    print(f"{label}: R0 = {pt['r0']:.2f}, kappa = {pt['kappa']:.2f}, throughput {res.value:.4f}")


for s in ("tbrs", "jrjs"):
    show(f"{s} unconstrained", an.optimize_throughput(template, s, r0, kappa))
    # Constraints cap the connection and secrecy outage probabilities.
    for c in (0.5, 0.1):
        show(f"{s} outages <= {c}",
             an.optimize_throughput(template, s, r0, kappa, upsilon=c, delta=c))

# The same search from the shell:
#   relaysec optimize --config run.cfg
