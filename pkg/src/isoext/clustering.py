"""Pigeonhole scale selection and partition into well-separated clusters.

Scans the geometric ladder tau_m = exp(-(5m+1)/eps) * diam(E) until a rung is
found with no pairwise distance inside the open band
(exp(-5/eps) * tau, tau); the clusters are then the connected components of
the "distance <= exp(-5/eps) * tau" graph.  Each pairwise distance can kill
at most one rung, so at most k(k-1)/2 + 1 rungs are ever examined.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .geometry import PointConfig


@dataclass(frozen=True)
class Clustering:
    """A partition of a point configuration at a selected scale tau."""

    tau: float
    clusters: list  # list of PointConfig, partitioning the input
    epsilon: float
    indices: list = field(default_factory=list)  # index partition, same order
    c_k: float = 0.0  # ladder-depth constant in tau >= exp(-c_k/eps) diam

    @property
    def n_clusters(self):
        return len(self.clusters)


def _components(adjacency):
    """Connected components of a boolean adjacency matrix, each sorted, and
    ordered by lowest member index."""
    n = adjacency.shape[0]
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if adjacency[i, j] and not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def _check_invariants(config, epsilon, tau, comps, c_k):
    """Verify the five clustering invariants before returning."""
    n = len(config)
    dists = config.pairwise_distances
    beta = np.exp(-5.0 / epsilon)
    flat = sorted(i for comp in comps for i in comp)
    if flat != list(range(n)):
        raise InternalConsistencyError("clusters do not partition the input")
    for comp in comps:
        if len(comp) > n - 1:
            raise InternalConsistencyError(
                f"a cluster holds {len(comp)} of {n} points; expected <= n-1"
            )
        for a in comp:
            for b in comp:
                if dists[a, b] > beta * tau:
                    raise InternalConsistencyError(
                        f"cluster diameter {dists[a, b]:.3e} exceeds "
                        f"exp(-5/eps)*tau = {beta * tau:.3e}"
                    )
    for ci in range(len(comps)):
        for cj in range(ci + 1, len(comps)):
            for a in comps[ci]:
                for b in comps[cj]:
                    if dists[a, b] < tau:
                        raise InternalConsistencyError(
                            f"inter-cluster distance {dists[a, b]:.3e} below tau = {tau:.3e}"
                        )
    diam = config.diameter
    if not (np.exp(-c_k / epsilon) * diam <= tau <= np.exp(-1.0 / epsilon) * diam):
        raise InternalConsistencyError(
            f"selected tau = {tau:.3e} escapes "
            f"[exp(-{c_k}/eps), exp(-1/eps)] * diam"
        )


def cluster(config, epsilon):
    """Partition a point configuration into clusters of diameter at most
    exp(-5/eps) * tau, pairwise separated by at least tau.

    Deterministic: the first acceptable rung of the ladder is always chosen.
    """
    if not isinstance(config, PointConfig):
        config = PointConfig(config)
    n = len(config)
    if n < 2:
        raise InvalidInputError("clustering needs at least 2 points")
    if not (0.0 < epsilon < 1.0):
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    diam = config.diameter
    dists = config.pairwise_distances
    off = dists[np.triu_indices(n, k=1)]
    beta = np.exp(-5.0 / epsilon)
    n_pairs = n * (n - 1) // 2
    c_k = 5.0 * n_pairs + 1.0

    for m in range(n_pairs + 1):
        tau = np.exp(-(5.0 * m + 1.0) / epsilon) * diam
        if tau <= 0.0:
            break
        if not np.any((off > beta * tau) & (off < tau)):
            adjacency = dists <= beta * tau
            comps = _components(adjacency)
            _check_invariants(config, epsilon, tau, comps, c_k)
            return Clustering(
                tau=float(tau),
                clusters=[config.subset(comp) for comp in comps],
                epsilon=float(epsilon),
                indices=comps,
                c_k=c_k,
            )
    raise InternalConsistencyError(
        "pigeonhole selection failed; the scale ladder underflowed before an "
        "empty band was found (epsilon too small for this point count)"
    )
