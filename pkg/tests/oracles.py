"""Slow, independent reimplementations used as test oracles."""
import itertools
import math

import numpy as np

from cyclecrf import enumerate_triangles, phi, unary_potential


def reference_step(q, graph, params, k=1.0, t=1.0):
    """Edge-by-edge evaluation that enumerates label patterns explicitly."""
    tris = [tuple(r) for r in enumerate_triangles(graph).edges.tolist()]
    gamma_by_cuts = {0: params.gamma_valid[0], 2: params.gamma_valid[1], 3: params.gamma_valid[2]}

    def belief(e, label):
        return phi(q[e] if label == 1 else 1.0 - q[e], k)

    out = np.empty(len(q))
    for i in range(len(q)):
        expo = []
        for label in (0, 1):
            energy = params.unary_weight * unary_potential(graph.probs[i], label)
            for tri in tris:
                if i not in tri:
                    continue
                others = [e for e in tri if e != i]
                valid_mass, weighted = 0.0, 0.0
                for la, lb in itertools.product((0, 1), repeat=2):
                    cuts = label + la + lb
                    if cuts == 1:
                        continue
                    w = belief(others[0], la) * belief(others[1], lb)
                    valid_mass += w
                    weighted += gamma_by_cuts[cuts] * w
                energy += weighted + (1.0 - valid_mass) * params.gamma_max
            expo.append(-energy / t)
        m = max(expo)
        e0, e1 = math.exp(expo[0] - m), math.exp(expo[1] - m)
        out[i] = e1 / (e0 + e1)
    return out
