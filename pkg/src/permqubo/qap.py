"""Quadratic assignment problems over permutation matrices.

An instance asks to minimise

    f(x) = x^T W x + c^T x,    x = vec(X),  X an n-by-n permutation matrix,

where vec stacks columns: column j of X occupies positions j*n .. j*n+n-1
of x.  Every module in this package shares that single vectorisation
convention.  Binary vectors are plain integer numpy arrays; validation
happens at the boundaries rather than through a wrapper class.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Factorial enumeration guard for the exact solver (8! = 40320 candidates).
BRUTE_FORCE_MAX_N = 8

_PERM_CHUNK = 5040  # permutations per vectorised energy batch


def _as_square(a, size, name):
    a = np.asarray(a, dtype=float)
    if a.shape != (size, size):
        raise ValueError(f"{name} must have shape ({size}, {size}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_vector(a, size, name):
    a = np.asarray(a, dtype=float)
    if a.shape != (size,):
        raise ValueError(f"{name} must have shape ({size},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass
class QapInstance:
    """Quadratic assignment instance.

    Attributes:
        n: side length of the permutation matrices.
        W: quadratic cost matrix of shape (n^2, n^2), stored exactly as
           given; symmetrisation is an explicit operation (see
           :func:`symmetrize`), never implicit.
        c: linear cost vector of length n^2.
    """

    n: int
    W: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        self.n = int(self.n)
        m = self.n * self.n
        self.W = _as_square(self.W, m, "W")
        self.c = _as_vector(self.c, m, "c")

    def to_dict(self) -> dict:
        return {"n": self.n, "W": self.W.tolist(), "c": self.c.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "QapInstance":
        for key in ("n", "W", "c"):
            if key not in data:
                raise ValueError(f"instance JSON is missing field {key!r}")
        return cls(n=data["n"], W=np.asarray(data["W"]), c=np.asarray(data["c"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "QapInstance":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class PermutationMatrix:
    """Permutation matrix encoded by its column assignment.

    ``assignment[j]`` is the row index i carrying the single one of
    column j, i.e. X[assignment[j], j] = 1.
    """

    n: int
    assignment: np.ndarray

    def __post_init__(self):
        self.n = int(self.n)
        self.assignment = np.asarray(self.assignment, dtype=int)
        if self.assignment.shape != (self.n,):
            raise ValueError(
                f"assignment must have length {self.n}, got shape {self.assignment.shape}"
            )
        if sorted(self.assignment.tolist()) != list(range(self.n)):
            raise ValueError("assignment must be a bijection on {0,...,n-1}")

    def matrix(self) -> np.ndarray:
        X = np.zeros((self.n, self.n))
        X[self.assignment, np.arange(self.n)] = 1.0
        return X

    @classmethod
    def identity(cls, n: int) -> "PermutationMatrix":
        return cls(n, np.arange(n))


@dataclass
class DistanceData:
    """A pair of metric-like matrices defining matching costs.

    d1 holds distances between the nodes of the first structure, d2
    between the nodes of the second.  ``linear_bias`` optionally adds a
    per-assignment linear cost (entry (i, j) prices matching node i of
    the first structure to node j of the second).
    """

    d1: np.ndarray
    d2: np.ndarray
    linear_bias: np.ndarray | None = None

    def __post_init__(self):
        self.d1 = np.asarray(self.d1, dtype=float)
        self.d2 = np.asarray(self.d2, dtype=float)
        for name, d in (("d1", self.d1), ("d2", self.d2)):
            if d.ndim != 2 or d.shape[0] != d.shape[1]:
                raise ValueError(f"{name} must be square, got shape {d.shape}")
            if not np.all(np.isfinite(d)):
                raise ValueError(f"{name} contains non-finite entries")
            if not np.array_equal(d, d.T):
                raise ValueError(f"{name} must be symmetric")
            if np.any(d < 0):
                raise ValueError(f"{name} must be nonnegative")
            if np.any(np.diag(d) != 0):
                raise ValueError(f"{name} must have a zero diagonal")
        if self.d1.shape != self.d2.shape:
            raise ValueError(
                f"d1 and d2 must have the same shape, got {self.d1.shape} and {self.d2.shape}"
            )
        if self.linear_bias is not None:
            self.linear_bias = _as_square(self.linear_bias, self.d1.shape[0], "linear_bias")

    @property
    def n(self) -> int:
        return self.d1.shape[0]

    @classmethod
    def from_dict(cls, data: dict) -> "DistanceData":
        for key in ("n", "d1", "d2"):
            if key not in data:
                raise ValueError(f"distance JSON is missing field {key!r}")
        d1 = np.asarray(data["d1"], dtype=float)
        if d1.shape != (data["n"], data["n"]):
            raise ValueError("d1 shape disagrees with declared n")
        return cls(d1=d1, d2=np.asarray(data["d2"]), linear_bias=data.get("linear_bias"))

    @classmethod
    def load(cls, path) -> "DistanceData":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def vectorize(perm: PermutationMatrix) -> np.ndarray:
    """Column-major stacking of a permutation matrix into n^2 bits."""
    n = perm.n
    x = np.zeros(n * n, dtype=int)
    x[np.arange(n) * n + perm.assignment] = 1
    return x


def qap_energy(inst: QapInstance, x) -> float:
    """Evaluate x^T W x + c^T x with W exactly as stored."""
    x = np.asarray(x, dtype=float)
    m = inst.n * inst.n
    if x.shape != (m,):
        raise ValueError(f"x must have length {m}, got shape {x.shape}")
    return float(x @ inst.W @ x + inst.c @ x)


def _assignment_energies(inst: QapInstance, assignments: np.ndarray) -> np.ndarray:
    """Energies of a batch of permutations given as (k, n) assignment arrays."""
    k, n = assignments.shape
    X = np.zeros((k, n * n))
    X[np.arange(k)[:, None], np.arange(n) * n + assignments] = 1.0
    return ((X @ inst.W) * X).sum(axis=1) + X @ inst.c


def _scan_permutations(inst: QapInstance, want_max: bool):
    n = inst.n
    best_energy = None
    best_assignment = None
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, _PERM_CHUNK)), dtype=int)
        if chunk.size == 0:
            break
        energies = _assignment_energies(inst, chunk)
        idx = int(np.argmax(energies)) if want_max else int(np.argmin(energies))
        # Strict comparison keeps the earliest (lexicographically smallest)
        # assignment on ties.
        if best_energy is None or (energies[idx] > best_energy if want_max else energies[idx] < best_energy):
            best_energy = float(energies[idx])
            best_assignment = chunk[idx].copy()
    return PermutationMatrix(n, best_assignment), best_energy


def brute_force_qap(inst: QapInstance) -> tuple[PermutationMatrix, float]:
    """Exact minimiser over all n! permutations.

    Ties are broken by the lexicographically smallest assignment array so
    the result is deterministic.  Guarded at n <= 8.
    """
    if inst.n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute force enumeration is limited to n <= {BRUTE_FORCE_MAX_N}, got n={inst.n}"
        )
    return _scan_permutations(inst, want_max=False)


def worst_permutation(inst: QapInstance) -> tuple[PermutationMatrix, float]:
    """Exact maximiser over all n! permutations (used to price invalid outputs)."""
    if inst.n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute force enumeration is limited to n <= {BRUTE_FORCE_MAX_N}, got n={inst.n}"
        )
    return _scan_permutations(inst, want_max=True)


def isometric_cost(dist: DistanceData) -> QapInstance:
    """Matching costs rewarding distance-preserving assignments.

    The quadratic coupling between x_(i,j) and x_(k,l) is
    |d1(i,k) - d2(j,l)|, so the energy of a permutation sums the metric
    distortion over all node pairs.  The linear term is the vectorised
    ``linear_bias`` (zero when absent).
    """
    n = dist.n
    # Axes (i, j, k, l) -> entry at (j*n+i, l*n+k) under column-major vec.
    four = np.abs(dist.d1[:, None, :, None] - dist.d2[None, :, None, :])
    W = four.transpose(1, 0, 3, 2).reshape(n * n, n * n)
    if dist.linear_bias is not None:
        c = dist.linear_bias.flatten(order="F")
    else:
        c = np.zeros(n * n)
    return QapInstance(n=n, W=W, c=c)


def symmetrize(inst: QapInstance) -> QapInstance:
    """Replace W by (W + W^T)/2; energies are unchanged on every x."""
    return QapInstance(n=inst.n, W=(inst.W + inst.W.T) / 2.0, c=inst.c.copy())
