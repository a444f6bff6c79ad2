"""
Choosing the cube size
======================

On the cube of half side K the range becomes [1/((n+1)K), 1/K]. The
worst-case factor max(1/K, (n+1)K) is smallest at K = 1/sqrt(n+1); a power
of two keeps subdivision exact at a small price.
"""

from fractions import Fraction

import numpy as np

from so3atlas import DistortionRange, compose, distortion_range_mu, optimal_scale, scaled_model_range

for n in (2, 3):
    r = distortion_range_mu(n)
    print(f"n={n}: range [{r.lo}, {r.hi}], constant {r.constant()}")

for n in (2, 3):
    print(f"n={n}: optimum {optimal_scale(n)}, dyadic {optimal_scale(n, dyadic_only=True)}")

# The constant as a function of K for n = 3
for K in np.geomspace(0.125, 2, 9):
    print(f"K={K:.3f}  C0={scaled_model_range(3, K).constant():.4f}")

# Going from S3 to SO(3) doubles distances: compose with [2, 2]
print(compose(distortion_range_mu(3), DistortionRange(Fraction(2), Fraction(2))))
