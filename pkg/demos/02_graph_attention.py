"""Graph attention, pooling and the heterogeneous stacking layer on random graphs.

    python3 demos/02_graph_attention.py
"""

import numpy as np

from aasist3.graph import HeteroState, KanGal, KanGraphPool, KanHsGal, block_assignment
from aasist3.numerics import Tensor

rng = np.random.default_rng(0)
h = Tensor(rng.normal(size=(1, 6, 4)))

# Low temperature gives peaked maps, high temperature near-uniform ones.
for temperature in (1.0, 100.0):
    gal = KanGal(4, 4, np.random.default_rng(1), temperature=temperature)
    att = gal.attention(h).data[0]
    print(f"T={temperature:>5}: row sums {np.round(att.sum(1), 12)}  max weight {att.max():.3f}")

# Pooling keeps the highest-gated half of the nodes, in their original order.
pool = KanGraphPool(4, 0.5, np.random.default_rng(2))
gate = pool.score(h).sigmoid().data[0, :, 0]
print("gates:", np.round(gate, 3), "-> kept", pool(h).shape[1], "nodes")

# Which projection vector scores each pair in a 3 temporal + 2 spatial graph:
# 0 within temporal, 2 within spatial, 1 across.
print(block_assignment(3, 2))

layer = KanHsGal(4, 4, 4, np.random.default_rng(3))
state = HeteroState(Tensor(rng.normal(size=(1, 3, 4))), Tensor(rng.normal(size=(1, 2, 4))), Tensor(np.zeros((1, 4))))
out = layer(state)
print("HS-GAL output shapes:", out.h_t.shape, out.h_s.shape, out.stack.shape)
