"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the vectorised production code
paths: plain Python loops over itertools, explicit four-index sums and
dense matrix exponentials.
"""

import itertools

import numpy as np
import scipy.linalg


def energy_loops(W, c, x):
    """x^T W x + c^T x by explicit double loop."""
    m = len(x)
    total = 0.0
    for i in range(m):
        for j in range(m):
            total += x[i] * W[i][j] * x[j]
    for i in range(m):
        total += c[i] * x[i]
    return total


def vec_assignment(n, assignment):
    """Column-major vectorisation of the permutation with X[assignment[j], j] = 1."""
    x = [0] * (n * n)
    for j, i in enumerate(assignment):
        x[j * n + i] = 1
    return x


def brute_force_loops(W, c, n):
    """Minimum over all permutations in lexicographic assignment order."""
    best = None
    best_assignment = None
    for assignment in itertools.permutations(range(n)):
        e = energy_loops(W, c, vec_assignment(n, assignment))
        if best is None or e < best:
            best = e
            best_assignment = assignment
    return best_assignment, best


def isometric_energy_loops(d1, d2, assignment):
    """Four-index distortion sum of a permutation (row[j] = assignment[j])."""
    n = len(assignment)
    X = [[0] * n for _ in range(n)]
    for j, i in enumerate(assignment):
        X[i][j] = 1
    total = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    total += X[i][j] * X[k][l] * abs(d1[i][k] - d2[j][l])
    return total


def enumerate_qubo_loops(model):
    """All (state, energy) pairs via itertools.product and the loop energy."""
    out = []
    for bits in itertools.product((0, 1), repeat=model.dim):
        out.append((bits, energy_loops(model.Q, model.q, bits) + model.offset))
    return out


def dense_propagator(pair, sched):
    """Reference integrator: dense expm of the frozen-midpoint Hamiltonian."""
    dim = pair.dim
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    steps = sched.effective_steps()
    dt = sched.tau / steps
    eye = np.eye(dim)
    for k in range(steps):
        u = sched.path_value((k + 0.5) / steps)
        H = np.column_stack([pair.apply(u, eye[:, j]) for j in range(dim)])
        psi = scipy.linalg.expm(-1j * H * dt) @ psi
    return psi


def dense_hamiltonian(pair, u):
    """H(u) assembled column by column from the matrix-free action."""
    dim = pair.dim
    eye = np.eye(dim)
    return np.column_stack([pair.apply(u, eye[:, j]) for j in range(dim)])


def total_variation(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
