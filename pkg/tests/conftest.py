"""Shared draw helpers for the test suite.

Every test seeds its own ``numpy.random.default_rng``, so runs are
deterministic.  Parameter draws reject neighbourhoods of the hyperplanes
where the ladder recurrence or the continued fraction legitimately breaks
down (integer ``beta - delta``, integer ladder offsets, vanishing
denominators), so each drawn set is admissible for all accessory-set
methods at once.
"""

import numpy as np
import scipy.optimize

from fuchsia_heun.connection import FuchsianConnection, HeunParameters
from fuchsia_heun.numkit import eig_small

HYPERPLANE_MARGIN = 0.05
POINT_SEPARATION = 0.8
EIGENVALUE_GAP = 0.05


def dist_to_int(z) -> float:
    """Distance from a complex number to the nearest integer."""
    z = complex(z)
    return abs(z - round(z.real))


def rand_complex(rng, re=(-1.0, 1.0), im=(-1.0, 1.0)) -> complex:
    return complex(rng.uniform(*re), rng.uniform(*im))


def draw_terminating_params(rng, m: int) -> HeunParameters:
    """Heun parameters with epsilon = -m, clear of breakdown hyperplanes.

    The rejection keeps gamma, delta, alpha, beta and the combinations
    entering the three-term ladder (beta - delta, alpha - delta,
    alpha + beta - delta, beta - epsilon - alpha) away from integers, and
    the cross-ratio point away from 0 and 1.
    """
    while True:
        a = rand_complex(rng, re=(-4.0, 4.0), im=(-2.0, 2.0))
        if abs(a) < 1.2 or abs(a - 1.0) < 1.2 or abs(a) > 4.5:
            continue
        gamma = rand_complex(rng, re=(0.1, 0.9), im=(-0.3, 0.3))
        delta = rand_complex(rng, re=(0.1, 0.9), im=(-0.3, 0.3))
        alpha = rand_complex(rng, re=(-0.9, 0.9), im=(-0.3, 0.3))
        epsilon = complex(-m)
        beta = gamma + delta + epsilon - alpha - 1.0
        combos = (gamma, delta, alpha, beta, beta - delta, alpha - delta,
                  alpha + beta - delta, alpha - beta, beta - epsilon - alpha)
        if all(dist_to_int(v) >= HYPERPLANE_MARGIN for v in combos):
            return HeunParameters(a=a, q=0.0, alpha=alpha, beta=beta,
                                  gamma=gamma, delta=delta, epsilon=epsilon)


def random_diagonalisable(rng, scale: float = 0.5) -> np.ndarray:
    """Random 2x2 complex matrix with comfortably distinct eigenvalues."""
    while True:
        m = scale * (rng.uniform(-1, 1, (2, 2)) + 1j * rng.uniform(-1, 1, (2, 2)))
        (l1, _), (l2, _) = eig_small(m)
        if abs(l1 - l2) > EIGENVALUE_GAP:
            return m


def random_connection(rng, n_points: int = 3, scale: float = 0.5,
                      box=(2.5, 1.5)) -> FuchsianConnection:
    """Random rank-2 connection with well separated finite singular points."""
    while True:
        pts = [rand_complex(rng, re=(-box[0], box[0]), im=(-box[1], box[1]))
               for _ in range(n_points)]
        seps = [abs(p - q) for i, p in enumerate(pts) for q in pts[i + 1:]]
        if not seps or min(seps) >= POINT_SEPARATION:
            break
    residues = [random_diagonalisable(rng, scale) for _ in pts]
    return FuchsianConnection(pts, residues)


def multiset_gap(u, v) -> float:
    """Largest pairing distance under the optimal matching of two multisets."""
    u, v = list(u), list(v)
    if len(u) != len(v):
        return float("inf")
    if not u:
        return 0.0
    cost = np.array([[abs(complex(x) - complex(y)) for y in v] for x in u])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def eigenvalues(matrix) -> list:
    """Eigenvalues of a small matrix, without the eigenvectors."""
    return [lam for lam, _ in eig_small(matrix)]
