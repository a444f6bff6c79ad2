"""
Certified epsilon-covers of SO(3)
=================================

Subdivide each of the four cubes uniformly until every box's image has
rotation-angle diameter at most epsilon; the lifted box centers then cover
SO(3) at radius epsilon. A k-d tree over the samples checks the claim.
"""

import numpy as np

from so3atlas import AtlasTree, Model, ModelKind, build_epsilon_cover
from so3atlas.checks import nearest_sample_angles
from so3atlas.geometry import random_quaternions

kind = ModelKind(Model.SO3)
queries = random_quaternions(10**5, np.random.default_rng(42))
for eps in (1.0, 0.5, 0.25):
    cover = build_epsilon_cover(kind, eps)
    worst = nearest_sample_angles(cover.samples, queries).max()
    print(f"eps={eps}: depth {cover.depth}, {cover.tree.leaf_count} samples, worst nearest {worst:.4f}")

# Trees also answer point location and adjacency queries
tree = AtlasTree.uniform(kind, 1)
leaf = tree.locate([1.0, 0.0, 0.0, 0.0])
print(leaf, "neighbors:", tree.neighbors(leaf))
