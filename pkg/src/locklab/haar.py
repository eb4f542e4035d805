"""Haar-random unitaries, swap-operator machinery, and second-moment twirls.

Sampling follows the Ginibre + QR construction with the R-diagonal phase
correction, which draws exactly from the Haar measure.  The exact twirl
uses the symmetric/antisymmetric projector decomposition of the Haar
average of U (x) U conjugation; the Monte Carlo twirl is its
self-consistency oracle.  Random streams are addressed by
(master_seed, stream_index) pairs backed by the counter-based Philox
generator, so any stream can be reproduced independently of execution
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import SubsystemLayout, UnitaryOperator


@dataclass(frozen=True)
class RngSpec:
    """Addressable random stream: same (master_seed, stream_index), same samples."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed,
                                     spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))

    def stream(self, index: int) -> "RngSpec":
        return RngSpec(self.master_seed, index)


def haar_batch(d: int, n: int, gen: np.random.Generator) -> np.ndarray:
    """n Haar-random d x d unitaries, stacked along the first axis."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    z = gen.standard_normal((n, d, d)) + 1j * gen.standard_normal((n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("nii->ni", r)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def sample_haar(d: int, rng: RngSpec, label: str = "A") -> UnitaryOperator:
    """One Haar-random unitary on a d-dimensional system."""
    u = haar_batch(d, 1, rng.generator())[0]
    return UnitaryOperator(u, SubsystemLayout.single(label, d), check=False)


def swap_operator(d: int) -> np.ndarray:
    """The operator F on a d x d bipartite space with F|psi>|phi> = |phi>|psi>."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    f = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def sym_projectors(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Projectors (I +- F)/2 onto the symmetric and antisymmetric subspaces."""
    f = swap_operator(d)
    eye = np.eye(d * d)
    return (eye + f) / 2, (eye - f) / 2


@dataclass(frozen=True)
class TwirlResult:
    """Exact Haar average of (U x U x I) X (U x U x I)^dag.

    ``assembled`` equals Pi_+ (x) alpha_+ + Pi_- (x) alpha_- in the
    (A, Abar, R) layout ordering.
    """

    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    assembled: np.ndarray


def schur_twirl(x: np.ndarray, d_a: int, d_r: int = 1) -> TwirlResult:
    """Exact second-moment twirl over the Haar measure with a spectator system.

    The spectator components are alpha_pm = Tr_{A Abar}[X (Pi_pm x I_R)]
    divided by rank(Pi_pm) = d_a (d_a +- 1) / 2.
    """
    x = np.asarray(x, dtype=complex)
    dim = d_a * d_a * d_r
    if x.shape != (dim, dim):
        raise ValueError(f"expected a {dim} x {dim} matrix, got {x.shape}")
    pi_p, pi_m = sym_projectors(d_a)
    x6 = x.reshape(d_a * d_a, d_r, d_a * d_a, d_r)
    alphas = []
    for pi, rank in ((pi_p, d_a * (d_a + 1) // 2), (pi_m, d_a * (d_a - 1) // 2)):
        if rank == 0:
            alphas.append(np.zeros((d_r, d_r), dtype=complex))
            continue
        # alpha[r, r'] = sum_{p q} x[p, r, q, r'] pi[q, p] / rank
        alphas.append(np.einsum("prqs,qp->rs", x6, pi) / rank)
    assembled = np.kron(pi_p, alphas[0]) + np.kron(pi_m, alphas[1])
    return TwirlResult(alphas[0], alphas[1], assembled)


def mc_twirl(x: np.ndarray, d_a: int, d_r: int, n_samples: int,
             rng: RngSpec, chunk: int = 4096) -> tuple[np.ndarray, float]:
    """Monte Carlo estimate of the twirl with an entrywise standard error.

    Returns (mean matrix, scalar stderr), where the scalar is the largest
    entrywise standard error of the mean.  Deterministic given ``rng``.
    """
    x = np.asarray(x, dtype=complex)
    dim = d_a * d_a * d_r
    if x.shape != (dim, dim):
        raise ValueError(f"expected a {dim} x {dim} matrix, got {x.shape}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    gen = rng.generator()
    eye_r = np.eye(d_r)
    s1 = np.zeros((dim, dim), dtype=complex)
    s2 = np.zeros((dim, dim))  # sum of |entry|^2
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        u = haar_batch(d_a, b, gen)
        uu = np.einsum("nij,nkl->nikjl", u, u).reshape(b, d_a * d_a, d_a * d_a)
        w = np.einsum("nab,cd->nacbd", uu, eye_r).reshape(b, dim, dim)
        y = w @ x @ np.conj(np.transpose(w, (0, 2, 1)))
        s1 += y.sum(axis=0)
        s2 += (np.abs(y) ** 2).sum(axis=0)
        done += b
    mean = s1 / n_samples
    var = np.maximum(s2 / n_samples - np.abs(mean) ** 2, 0.0)
    stderr = float(np.sqrt(var.max() / n_samples))
    return mean, stderr


def levy_bound(theta: float, d: int, eps: float) -> float:
    """Concentration probability bound exp(-d eps^2 / (4 theta^2)), clamped to 1."""
    if theta <= 0:
        raise ValueError("Lipschitz constant must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return min(1.0, math.exp(-d * eps * eps / (4.0 * theta * theta)))
