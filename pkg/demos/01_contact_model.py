"""
Learning when a neighbour comes back
====================================

A node hears HELLO beacons from a neighbour once per period while the two are
in range. The on/off pattern becomes two duration series, contacts and gaps,
and each is fitted online with an ARMA(2,1) model.
"""

import numpy as np

from orion_dtn.arma import ArmaParams, acf, pacf, simulate_arma
from orion_dtn.contacts import NeighborContactState

# a neighbour on a bus-like loop: about 20 s in range, then about 40 s away
rng = np.random.default_rng(3)
presence = []
for _ in range(25):
    presence += [True] * int(rng.integers(17, 24)) + [False] * int(rng.integers(34, 47))
presence += [True] * 20 + [False] * 10  # stop ten seconds into a gap

state = NeighborContactState(neighbor_id=7, delta_t=1.0)
for k, heard in enumerate(presence, start=1):
    if heard:
        state.record_hello(float(k))
    else:
        state.tick(float(k))

print("contacts :", state.c_history[:8], "...")
print("gaps     :", state.cbar_history[:8], "...")
print("fitted C :", state.c_model.params)

now = float(len(presence))
pred = state.predict_next_contact(now)
print(f"\nat t={now:g}s the next contact is expected at t={pred.next_contact_start:.1f}s "
      f"for about {pred.expected_duration:.1f}s ({pred.confidence_n} observations behind it)")

# %%
# Why ARMA(2,1)? On a longer synthetic series the sample ACF tails off while
# the PACF drops to noise after lag 2, pointing at an order-2 AR part.

y = simulate_arma(ArmaParams(30.0, 0.3, 0.4, 0.3, 4.0), 3000, seed=1)
rho = acf(y, 6)
print("\nacf :", np.round(rho[1:], 3))
print("pacf:", np.round(pacf(rho, 6), 3))
