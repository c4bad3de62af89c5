"""Complete solution landscape of a closed-form energy.

E(x, y) = (x^2 - 1)^2 + (y^2 - 1)^2 has nine stationary points: a
single index-2 top at the origin, four index-1 saddles on the axes, and
four minima at the corners.  Starting from the top, repeated downward
saddle searches discover the whole hierarchy with its connections.
"""

from nematicq import build_landscape, make_record
from nematicq.toys import Quartic2D
import numpy as np

system = Quartic2D()
seed = make_record(system, np.array(Quartic2D.TOP), k_hint=2)
graph = build_landscape(system, seed)

print(f"{len(graph.nodes)} stationary points, {len(graph.edges)} search connections\n")
for rec in graph.nodes:
    x, y = rec.field
    print(
        f"node {rec.id}: index {rec.morse_index}  E = {rec.energy:.6f}  "
        f"at ({x:+.4f}, {y:+.4f})"
    )

print("\ndownward connections (parent -> child):")
for edge in graph.edges:
    a, b = graph.node(edge.source), graph.node(edge.target)
    print(
        f"  index-{a.morse_index} E={a.energy:.2f} -> "
        f"index-{b.morse_index} E={b.energy:.2f}"
    )

counts = {k: len(v) for k, v in sorted(graph.by_index().items())}
print(f"\npoints per index: {counts} (expected {{0: 4, 1: 4, 2: 1}})")
