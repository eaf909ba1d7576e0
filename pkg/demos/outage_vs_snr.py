"""
Outage probabilities versus transmit SNR
========================================

Three relays, three source antennas and a normalised feedback delay of 0.1.
The best relay (TBRS) is compared with joint relay and jammer selection
(JRJS), first in closed form and then against a Monte-Carlo run.
"""

import numpy as np

from relaysec import Scenario, TrialPlan, estimate
from relaysec import analytic as an

# A rate pair of one bit per channel use with an eighth of it kept secret.
snrs = np.arange(0.0, 31.0, 5.0)
build = lambda e, lam=0.1: Scenario.build(e, r0=1.0, rs=0.125, lam=lam, n_t=3, k_r=3, fd_td=0.1)

print("eta_dB   cop_tbrs  sop_tbrs   cop_jrjs  sop_jrjs")
for e in snrs:
    sc = build(e)
    print(f"{e:6.1f}   {an.cop_tbrs(sc):.4f}    {an.sop_tbrs(sc):.4f}     "
          f"{an.cop_jrjs(sc):.4f}    {an.sop_jrjs(sc):.4f}")

# Without jamming the connection outage vanishes with SNR while the secrecy
# outage grows toward one. Jamming stops both from saturating.
floors = an.jrjs_outage_floors(build(60.0))
print("JRJS floors at high SNR (cop, sop):", np.round(floors, 4))

# The TBRS forms are exact, so the simulator should sit within a few
# standard errors of them.
sc = build(10.0)
est = estimate(TrialPlan(sc, "tbrs", trials=200_000, master_seed=1))
for m, exact in (("cop", an.cop_tbrs(sc)), ("sop", an.sop_tbrs(sc))):
    z = (est[m].value - exact) / est[m].std_err
    print(f"{m}: MC {est[m].value:.4f} +/- {est[m].std_err:.4f}, exact {exact:.4f}, z = {z:+.2f}")

# The JRJS connection outage is an approximation that absorbs the receiver
# noise into the jamming term; the quadrature twin keeps the noise.
est = estimate(TrialPlan(sc, "jrjs", trials=200_000, master_seed=2))
print(f"jrjs cop: closed {an.cop_jrjs(sc):.4f}, quadrature "
      f"{an.cop_jrjs(sc, 'quadrature'):.4f}, MC {est['cop'].value:.4f}")
