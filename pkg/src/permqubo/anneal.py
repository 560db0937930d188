"""Annealing simulators: Schrödinger evolution and classical Metropolis.

The quantum simulators integrate i d/dt |psi> = H(t) |psi| with
H(t) = u(t) H_P + (1 - u(t)) H_B, starting from the uniform
superposition (the mixer ground state).  Time is dimensionless (hbar=1);
tau is the total evolution time and u(t) follows a piecewise-linear
schedule path.  Both simulators and the classical sampler produce
SampleSets: multisets of binary states with energies, counts and
permutation-validity flags.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, factorial
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import SizeCapError, SolverError
from .qap import PermutationMatrix, QapInstance, brute_force_qap, qap_energy, vectorize
from .qubo import QuboModel, decode
from .spectral import HamiltonianPair

EVOLVE_MAX_QUBITS = 12

# Optimality comparisons between recomputed permutation energies.
ENERGY_RTOL = 1e-9

_NORM_DRIFT = 1e-10
_KRYLOV_DIM = 24
# Substep budget: keep ||H|| * dt below this so the Krylov exponential
# converges far beyond the requested accuracy.
_STEP_BUDGET = 4.0


@dataclass
class AnnealSchedule:
    """Total time tau plus a piecewise-linear map s -> u of the path.

    ``path`` lists (s, u) breakpoints with s = t / tau; it must be
    monotone with path(0) = 0 and path(1) = 1.  A plateau breakpoint
    models a mid-anneal break.  ``steps`` is the number of
    frozen-midpoint integration steps; when None a resolution of 10
    steps per unit time (at least 100) is used.
    """

    tau: float
    path: tuple = ((0.0, 0.0), (1.0, 1.0))
    steps: int | None = None

    def __post_init__(self):
        self.tau = float(self.tau)
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        pts = [(float(s), float(u)) for s, u in self.path]
        if len(pts) < 2:
            raise ValueError("path needs at least two breakpoints")
        ss = [p[0] for p in pts]
        us = [p[1] for p in pts]
        if ss != sorted(ss):
            raise ValueError("path breakpoints must be sorted in s")
        if any(b < a for a, b in zip(us, us[1:])):
            raise ValueError("path must be monotone nondecreasing")
        if pts[0] != (0.0, 0.0) or pts[-1][0] != 1.0 or pts[-1][1] != 1.0:
            raise ValueError("path must start at (0, 0) and end at (1, 1)")
        self.path = tuple(pts)
        if self.steps is not None:
            self.steps = int(self.steps)
            if self.steps < 1:
                raise ValueError("steps must be positive")

    def path_value(self, s: float) -> float:
        ss = [p[0] for p in self.path]
        us = [p[1] for p in self.path]
        return float(np.interp(s, ss, us))

    def effective_steps(self) -> int:
        if self.steps is not None:
            return self.steps
        return max(100, ceil(10.0 * self.tau))

    def params(self) -> dict:
        return {"tau": self.tau, "path": [list(p) for p in self.path], "steps": self.effective_steps()}


def _lanczos_expm(apply_h, v: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i dt H) v for a Hermitian matrix-free action.

    Lanczos with full reorthogonalisation; the caller keeps ||H|| dt
    small enough that _KRYLOV_DIM vectors reach machine precision.
    """
    norm_v = np.linalg.norm(v)
    if norm_v == 0:
        return v
    k = min(_KRYLOV_DIM, v.shape[0])
    V = np.zeros((k, v.shape[0]), dtype=complex)
    alphas = np.zeros(k)
    betas = np.zeros(max(k - 1, 0))
    V[0] = v / norm_v
    used = k
    for j in range(k):
        w = apply_h(V[j])
        alphas[j] = np.vdot(V[j], w).real
        w = w - alphas[j] * V[j]
        if j > 0:
            w = w - betas[j - 1] * V[j - 1]
        # Full reorthogonalisation keeps the basis usable in floating point.
        w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        if j == k - 1:
            break
        beta = np.linalg.norm(w)
        if beta < 1e-14 * norm_v:
            used = j + 1
            break
        betas[j] = beta
        V[j + 1] = w / beta
    alphas = alphas[:used]
    betas = betas[: used - 1] if used > 1 else np.zeros(0)
    if used == 1:
        coef = np.array([np.exp(-1j * dt * alphas[0])])
    else:
        evals, evecs = eigh_tridiagonal(alphas, betas)
        coef = evecs @ (np.exp(-1j * dt * evals) * evecs[0])
    return (coef * norm_v) @ V[:used]


def _propagate(pair: HamiltonianPair, u: float, psi: np.ndarray, dt: float) -> np.ndarray:
    nsub = max(1, ceil(abs(dt) * pair.norm_bound(u) / _STEP_BUDGET))
    sub = dt / nsub
    for _ in range(nsub):
        psi = _lanczos_expm(lambda w: pair.apply(u, w), psi, sub)
    return psi


def evolve(pair: HamiltonianPair, sched: AnnealSchedule, callback=None,
           max_qubits: int = EVOLVE_MAX_QUBITS) -> np.ndarray:
    """Integrate the schedule and return the final state vector.

    Each step applies the exact unitary exp(-i H(u_mid) dt) of the
    Hamiltonian frozen at the step midpoint, evaluated through a
    matrix-free Krylov expansion; the stepping is therefore
    norm-preserving by construction.  ``callback(step, u, psi, norm)``
    receives the post-step state and its pre-renormalisation norm.
    """
    if pair.num_qubits > max_qubits:
        raise SizeCapError(
            f"state-vector evolution is limited to {max_qubits} qubits, got {pair.num_qubits}"
        )
    dim = pair.dim
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    steps = sched.effective_steps()
    dt = sched.tau / steps
    for k in range(steps):
        u = sched.path_value((k + 0.5) / steps)
        psi = _propagate(pair, u, psi, dt)
        if not np.all(np.isfinite(psi.view(float))):
            raise SolverError(
                f"non-finite amplitudes at step {k}: integration step too large"
            )
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > _NORM_DRIFT:
            psi = psi / norm
        if callback is not None:
            callback(k, u, psi, norm)
    return psi


def _mixer_rotation(psi: np.ndarray, theta: float, m: int) -> np.ndarray:
    """Apply exp(-i theta * (-sum_i sigma_x^(i))) = prod_i exp(i theta sigma_x)."""
    if theta == 0.0:
        return psi
    t = psi.reshape((2,) * m)
    c = np.cos(theta)
    s = 1j * np.sin(theta)
    for ax in range(m):
        t = c * t + s * np.flip(t, axis=ax)
    return t.reshape(-1)


def evolve_trotter(pair: HamiltonianPair, sched: AnnealSchedule, slices: int,
                   callback=None, max_qubits: int = EVOLVE_MAX_QUBITS) -> np.ndarray:
    """Piecewise-constant evolution with a symmetric second-order splitting.

    The schedule is frozen on ``slices`` equal segments; each segment
    applies exp(-i A dt/2) exp(-i B dt) exp(-i A dt/2) with
    A = (1-u) H_B (a tensor product of single-qubit rotations, exact)
    and B = u H_P (diagonal, exact).
    """
    if slices < 1:
        raise ValueError(f"slices must be at least 1, got {slices}")
    if pair.num_qubits > max_qubits:
        raise SizeCapError(
            f"state-vector evolution is limited to {max_qubits} qubits, got {pair.num_qubits}"
        )
    m = pair.num_qubits
    dim = pair.dim
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    dt = sched.tau / slices
    for ell in range(slices):
        u = sched.path_value((ell + 0.5) / slices)
        theta = (1.0 - u) * dt / 2.0
        psi = _mixer_rotation(psi, theta, m)
        psi = psi * np.exp(-1j * u * dt * pair.problem_diagonal)
        psi = _mixer_rotation(psi, theta, m)
        if not np.all(np.isfinite(psi.view(float))):
            raise SolverError(f"non-finite amplitudes in slice {ell}")
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > _NORM_DRIFT:
            psi = psi / norm
        if callback is not None:
            callback(ell, u, psi, norm)
    return psi


@dataclass
class SampleEntry:
    bits: tuple
    energy: float
    count: int
    valid: bool
    assignment: tuple | None

    def to_dict(self) -> dict:
        return {
            "bits": list(self.bits),
            "energy": self.energy,
            "count": self.count,
            "valid": self.valid,
            "assignment": None if self.assignment is None else list(self.assignment),
        }


@dataclass
class SampleSet:
    """Multiset of measured/annealed binary states.

    Entries are kept sorted by (energy, bits); counts add up to
    ``total``.  ``metadata`` carries provenance (seed, model hash,
    schedule parameters) into the JSON export.
    """

    entries: list
    total: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (e.energy, e.bits))
        if sum(e.count for e in self.entries) != self.total:
            raise ValueError("entry counts must sum to total")

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "entries": [e.to_dict() for e in self.entries],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def histogram_csv(self, path, bins: int = 40) -> None:
        """Energy histogram with per-bin valid counts, ready for plotting."""
        energies = np.array([e.energy for e in self.entries])
        counts = np.array([e.count for e in self.entries])
        valid = np.array([e.valid for e in self.entries])
        lo, hi = float(energies.min()), float(energies.max())
        if hi == lo:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, bins + 1)
        idx = np.clip(np.digitize(energies, edges) - 1, 0, bins - 1)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["energy_bin", "count", "valid_count"])
            for b in range(bins):
                mask = idx == b
                writer.writerow([
                    repr(float(edges[b])),
                    int(counts[mask].sum()),
                    int(counts[mask & valid].sum()),
                ])


def _make_entries(states: np.ndarray, counts: np.ndarray, model: QuboModel) -> list:
    entries = []
    for bits, count in zip(states, counts):
        bits = np.asarray(bits, dtype=int)
        perm = decode(model, bits)
        entries.append(
            SampleEntry(
                bits=tuple(int(b) for b in bits),
                energy=model.energy(bits),
                count=int(count),
                valid=perm is not None,
                assignment=None if perm is None else tuple(int(a) for a in perm.assignment),
            )
        )
    return entries


def measure(state: np.ndarray, shots: int, seed: int, model: QuboModel) -> SampleSet:
    """Sample basis states from |amplitudes|^2 and attach model energies."""
    if shots < 1:
        raise ValueError(f"shots must be at least 1, got {shots}")
    state = np.asarray(state)
    m = int(np.log2(state.shape[0]))
    if 2**m != state.shape[0]:
        raise ValueError("state length must be a power of two")
    if model.dim != m:
        raise ValueError(f"model has {model.dim} variables but the state has {m} qubits")
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    hit = np.nonzero(counts)[0]
    states = ((hit[:, None] >> np.arange(m)) & 1).astype(int)
    entries = _make_entries(states, counts[hit], model)
    return SampleSet(
        entries=entries,
        total=shots,
        metadata={"seed": int(seed), "shots": int(shots), "model_hash": model.content_hash()},
    )


def _estimate_t_hi(model: QuboModel, seed: int) -> float:
    """Largest |single-flip energy change| over a seeded sample of states."""
    rng = np.random.default_rng([seed, 0])
    S = rng.integers(0, 2, size=(64, model.dim)).astype(float)
    Q = (model.Q + model.Q.T) / 2.0
    G = S @ Q
    delta = 1.0 - 2.0 * S
    dE = 2.0 * delta * G + np.diag(Q)[None, :] + delta * model.q[None, :]
    t_hi = float(np.abs(dE).max())
    return t_hi if t_hi > 0 else 1.0


def simulated_annealing(model: QuboModel, sweeps: int, runs: int, seed: int,
                        schedule: tuple[float, float] | None = None) -> SampleSet:
    """Single-bit-flip Metropolis with geometric cooling.

    Each run r owns the generator seeded by (seed, 1+r) and draws its
    initial state followed by one acceptance uniform per flip attempt
    (consumed whether or not the Metropolis test needs it), so serial,
    batched and parallel executions all reproduce the same states.  A
    sweep attempts one flip per variable in index order.  ``schedule``
    overrides the (T_hi, T_lo) pair; by default T_hi is the sampled
    maximum |energy change| of a flip and T_lo = 1e-3 * T_hi.
    """
    if runs < 1 or sweeps < 1:
        raise ValueError("runs and sweeps must be at least 1")
    dim = model.dim
    Q = (model.Q + model.Q.T) / 2.0  # flip deltas below assume symmetry
    qlin = model.q
    diag = np.diag(Q).copy()

    if schedule is None:
        t_hi = _estimate_t_hi(model, seed)
        t_lo = 1e-3 * t_hi
    else:
        t_hi, t_lo = float(schedule[0]), float(schedule[1])
        if t_hi <= 0 or t_lo <= 0:
            raise ValueError("temperatures must be positive")
    if sweeps == 1:
        temps = np.array([t_hi])
    else:
        temps = t_hi * (t_lo / t_hi) ** (np.arange(sweeps) / (sweeps - 1))

    # Batch runs, bounded by the memory of the pregenerated uniforms.
    chunk = max(1, min(runs, int(2**24 // max(1, sweeps * dim))))
    final_states = np.empty((runs, dim), dtype=np.int8)
    for start in range(0, runs, chunk):
        stop = min(runs, start + chunk)
        rngs = [np.random.default_rng([seed, 1 + r]) for r in range(start, stop)]
        X = np.stack([rng.integers(0, 2, size=dim) for rng in rngs]).astype(float)
        U = np.stack([rng.random((sweeps, dim)) for rng in rngs])
        G = X @ Q
        for s in range(sweeps):
            T = temps[s]
            for k in range(dim):
                delta = 1.0 - 2.0 * X[:, k]
                dE = 2.0 * delta * G[:, k] + diag[k] + delta * qlin[k]
                accept = (dE <= 0.0) | (U[:, s, k] < np.exp(np.clip(-dE / T, -700.0, 50.0)))
                if np.any(accept):
                    step = delta * accept
                    X[:, k] += step
                    G += step[:, None] * Q[k][None, :]
        final_states[start:stop] = X.astype(np.int8)

    # Deterministic aggregation: group identical final states.
    uniq, counts = np.unique(final_states, axis=0, return_counts=True)
    entries = _make_entries(uniq, counts, model)
    return SampleSet(
        entries=entries,
        total=runs,
        metadata={
            "seed": int(seed),
            "runs": int(runs),
            "sweeps": int(sweeps),
            "t_hi": t_hi,
            "t_lo": t_lo,
            "model_hash": model.content_hash(),
        },
    )


def most_frequent(samples: SampleSet) -> SampleEntry:
    """Modal entry; ties prefer lower energy, then lexicographic bits."""
    return min(samples.entries, key=lambda e: (-e.count, e.energy, e.bits))


@dataclass
class SuccessReport:
    """Fraction of samples decoding to an optimal permutation.

    ``reference`` is the random-guessing success probability 1/n!,
    kept as an exact rational.
    """

    probability: float
    reference: Fraction
    n: int
    f_opt: float

    def to_dict(self) -> dict:
        return {
            "probability": self.probability,
            "reference": {
                "numerator": self.reference.numerator,
                "denominator": self.reference.denominator,
                "value": float(self.reference),
            },
            "n": self.n,
            "f_opt": self.f_opt,
        }


def success_probability(samples: SampleSet, inst: QapInstance) -> SuccessReport:
    """Score a SampleSet against the exact optimum of the instance."""
    _, f_opt = brute_force_qap(inst)
    tol = ENERGY_RTOL * max(1.0, abs(f_opt))
    hits = 0
    for entry in samples.entries:
        if entry.assignment is None:
            continue
        perm = PermutationMatrix(inst.n, np.asarray(entry.assignment, dtype=int))
        if qap_energy(inst, vectorize(perm)) <= f_opt + tol:
            hits += entry.count
    return SuccessReport(
        probability=hits / samples.total,
        reference=Fraction(1, factorial(inst.n)),
        n=inst.n,
        f_opt=f_opt,
    )
