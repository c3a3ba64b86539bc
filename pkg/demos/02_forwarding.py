"""
One forwarding decision at a time
=================================

ORION hands a packet to a neighbour that is closer to the destination, then
to one that is moving toward it, and otherwise schedules it for the neighbour
whose predicted contact scores best. With none of those it keeps the packet.
"""

from orion_dtn.contacts import ContactPrediction
from orion_dtn.protocols import NeighborSnapshot, Packet, f_opt, orion_forward

dest = (400.0, 250.0)
pk = Packet(packet_id=0, source_id=0, dest_id=9, dest_pos=dest, created_at=0.0)
me = (100.0, 250.0)


def show(title, connected, estimated=(), now=0.0):
    d = orion_forward(me, pk, connected, list(estimated), now)
    print(f"{title:<38} -> {d.action.value:<8} {d.next_hop!s:<5} ({d.rule.value})")


show("neighbour 2 sits closer to the target", [NeighborSnapshot(2, (180.0, 260.0), (175.0, 260.0))])
show("only a neighbour behind, heading east", [NeighborSnapshot(3, (60.0, 250.0), (40.0, 250.0))])
show("only a neighbour behind, heading west", [NeighborSnapshot(3, (60.0, 250.0), (80.0, 250.0))])

soon = ContactPrediction(next_contact_start=12.0, expected_duration=8.0, confidence_n=4)
later = ContactPrediction(next_contact_start=90.0, expected_duration=20.0, confidence_n=40)
show("nobody in range, two predicted contacts", [], [(5, soon), (6, later)])
show("nobody in range, nothing predicted", [])

# %%
# The schedule score blends inverse waiting time with a saturating count of
# observations; the weight shifts the choice between the two candidates.

for w in (0.9, 0.5, 0.1):
    a, b = f_opt(soon, 0.0, w), f_opt(later, 0.0, w)
    print(f"weight {w}: soon={a:.3f} later={b:.3f} -> {'5' if a >= b else '6'}")
