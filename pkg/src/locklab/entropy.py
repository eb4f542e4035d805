"""Entropy measures in bits, uniformity deficits, and the accessible-information cap.

Conventions: H_min = -log2(largest eigenvalue), H_2 = -log2 Tr[rho^2],
H_max = 2 log2 Tr[sqrt(rho)], von Neumann H = -Tr[rho log2 rho].
Eigenvalues below EIG_FLOOR are treated as exact zeros (0 log 0 = 0).
"""

from __future__ import annotations

import math

import numpy as np

from .qcore import DensityOperator, LayoutError, partial_trace

EIG_FLOOR = 1e-12

ENTROPY_KINDS = ("min", "renyi2", "max", "vonNeumann")
DELTA_KINDS = ("inf", "two")


def entropy(rho: DensityOperator, kind: str) -> float:
    """Entropy of a state in bits, for kind in {min, renyi2, max, vonNeumann}."""
    if kind not in ENTROPY_KINDS:
        raise ValueError(f"unknown entropy kind {kind!r}")
    lam = rho.spectrum()
    lam = lam[lam > EIG_FLOOR]
    if kind == "min":
        return float(-np.log2(lam.max()))
    if kind == "renyi2":
        return float(-np.log2(np.sum(lam ** 2)))
    if kind == "max":
        return float(2.0 * np.log2(np.sum(np.sqrt(lam))))
    return float(-np.sum(lam * np.log2(lam)))


def delta(rho: DensityOperator, ambient_dim: int, kind: str) -> float:
    """Deficit from uniformity: 2^(log2 ambient_dim - H), H = H_min or H_2.

    Equals 1 for the maximally mixed state on the ambient space and
    ambient_dim for a point mass.
    """
    if kind not in DELTA_KINDS:
        raise ValueError(f"unknown delta kind {kind!r}")
    if ambient_dim < 1:
        raise ValueError("ambient_dim must be positive")
    lam = rho.spectrum()
    rank = int(np.sum(lam > EIG_FLOOR))
    if rank > ambient_dim:
        raise ValueError(f"state support {rank} exceeds ambient dimension {ambient_dim}")
    h = entropy(rho, "min" if kind == "inf" else "renyi2")
    return float(ambient_dim * 2.0 ** (-h))


def mutual_information(rho: DensityOperator, cut) -> float:
    """Von Neumann mutual information H(A) + H(B) - H(AB) across a bipartition.

    ``cut`` names the A side; the rest of the layout is B.
    """
    cut = set(cut)
    labels = set(rho.layout.labels)
    if not cut or cut == labels or not cut <= labels:
        raise LayoutError("cut must be a nontrivial bipartition of the layout")
    a = partial_trace(rho, cut)
    b = partial_trace(rho, labels - cut)
    return entropy(a, "vonNeumann") + entropy(b, "vonNeumann") - entropy(rho, "vonNeumann")


def _eta(x: float) -> float:
    return 0.0 if x <= 0.0 else -x * math.log2(x)


def alicki_fannes_bound(eps: float, m: int) -> float:
    """Accessible-information cap 4 eps log2(M) + 2 eta(1-eps) + 2 eta(eps)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if m < 1:
        raise ValueError("message count must be positive")
    return 4.0 * eps * math.log2(m) + 2.0 * _eta(1.0 - eps) + 2.0 * _eta(eps)
