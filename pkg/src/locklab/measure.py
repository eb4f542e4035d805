"""Measurement superoperators, quasi-measurements, nets, and Chernoff sampling.

A quasi-measurement is a list of s unit vectors chi_i with the operator
constraint (d/s) sum_i chi_i chi_i^dag <= eta I.  Projective measurements
are exactly the (d, 1) case.  Sampling s outcome vectors from a complete
rank-one POVM yields a quasi-measurement except with probability bounded
by the operator Chernoff bound; nets over quasi-measurements use the
per-index metric sum_i ||chi_i chi_i^dag - nu_i nu_i^dag||_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .haar import RngSpec
from .qcore import DensityOperator, SubsystemLayout

QUASI_TOL = 1e-9


class BudgetExceededError(RuntimeError):
    """An enumeration budget would be exceeded; carries the required count."""

    def __init__(self, required: float, budget: int):
        super().__init__(
            f"net would need about {required:.3g} elements, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class MeasurementSuperoperator:
    """POVM stored as a list of PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...]
    outcome_labels: tuple = ()

    def __post_init__(self):
        els = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape != (d, d):
                raise ValueError("POVM elements must share a dimension")
            if np.linalg.eigvalsh(e)[0] < -QUASI_TOL:
                raise ValueError("POVM element is not PSD within tolerance")
            total += e
        if np.linalg.norm(total - np.eye(d), np.inf) > 1e-9 * max(1, d):
            raise ValueError("POVM elements do not sum to the identity")
        if not self.outcome_labels:
            object.__setattr__(self, "outcome_labels", tuple(range(len(els))))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    @staticmethod
    def basis(d: int) -> "MeasurementSuperoperator":
        return MeasurementSuperoperator(
            tuple(np.diag(np.eye(d)[i]).astype(complex) for i in range(d)))

    def rank_one_form(self, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
        """Split elements into weighted rank-1 pieces {alpha_i, chi_i}.

        Eigenvalues below ``tol`` are discarded.  Returns (alphas, vectors)
        with vectors stacked as rows.
        """
        alphas, chis = [], []
        for e in self.elements:
            lam, vecs = np.linalg.eigh(e)
            for k in range(lam.size):
                if lam[k] > tol:
                    alphas.append(lam[k])
                    chis.append(vecs[:, k])
        return np.asarray(alphas), np.asarray(chis)


@dataclass(frozen=True)
class QuasiMeasurement:
    """s equally weighted rank-1 outcomes with excess parameter eta."""

    chi: np.ndarray  # (s, d), rows are unit vectors
    eta: float = 1.0
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex)
        if chi.ndim != 2 or chi.shape[0] < 1:
            raise ValueError("chi must be a nonempty (s, d) array")
        object.__setattr__(self, "chi", chi)
        if self.check:
            ok, max_eig = validate_quasi(chi, chi.shape[0], self.eta)
            if not ok:
                raise ValueError(
                    f"not an (s, eta)-quasi-measurement: max eigenvalue {max_eig} > {self.eta}")

    @property
    def s(self) -> int:
        return self.chi.shape[0]

    @property
    def dim(self) -> int:
        return self.chi.shape[1]

    @staticmethod
    def projective(basis: np.ndarray) -> "QuasiMeasurement":
        """The (d, 1)-quasi-measurement given by an orthonormal basis (columns)."""
        return QuasiMeasurement(np.asarray(basis, dtype=complex).T, eta=1.0)


def validate_quasi(chi: np.ndarray, s: int, eta: float) -> tuple[bool, float]:
    """Check (d/s) sum_i chi_i chi_i^dag <= eta I; returns (ok, max eigenvalue)."""
    if s == 0:
        raise ValueError("s must be positive")
    chi = np.asarray(chi, dtype=complex)
    if chi.shape[0] != s:
        raise ValueError(f"expected {s} vectors, got {chi.shape[0]}")
    norms = np.linalg.norm(chi, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError("all chi_i must be unit vectors")
    d = chi.shape[1]
    gram = (d / s) * (chi.conj().T @ chi)
    max_eig = float(np.linalg.eigvalsh(gram)[-1])
    return max_eig <= eta + QUASI_TOL, max_eig


def apply_measurement(m, rho: DensityOperator) -> DensityOperator:
    """Measure a state, returning the diagonal outcome-register operator.

    For a true POVM the diagonal sums to 1; for a quasi-measurement the
    weights are (d/s) <chi_i| rho |chi_i> and may not be normalized.
    """
    probs = outcome_weights(m, rho.matrix)
    layout = SubsystemLayout.single("X", probs.size)
    return DensityOperator(np.diag(probs).astype(complex), layout, check=False)


def outcome_weights(m, rho_matrix: np.ndarray) -> np.ndarray:
    """Outcome weight vector of a POVM or quasi-measurement on a raw matrix."""
    rho_matrix = np.asarray(rho_matrix, dtype=complex)
    if isinstance(m, MeasurementSuperoperator):
        if m.dim != rho_matrix.shape[0]:
            raise ValueError("measurement and state dimensions differ")
        return np.array([float(np.trace(e @ rho_matrix).real) for e in m.elements])
    if isinstance(m, QuasiMeasurement):
        if m.dim != rho_matrix.shape[0]:
            raise ValueError("measurement and state dimensions differ")
        w = np.einsum("id,de,ie->i", m.chi.conj(), rho_matrix, m.chi).real
        return (m.dim / m.s) * w
    raise TypeError(f"unsupported measurement type {type(m).__name__}")


def chernoff_bound(d: int, s: int, eta: float) -> float:
    """Failure-probability bound 2 d exp(-s (eta-1)^2 / (d 2 ln 2)), clamped to 1."""
    if eta <= 1.0:
        raise ValueError("eta must exceed 1")
    if d < 1 or s < 1:
        raise ValueError("d and s must be positive")
    return min(1.0, 2.0 * d * math.exp(-s * (eta - 1.0) ** 2 / (d * 2.0 * math.log(2))))


def chernoff_sample(m: MeasurementSuperoperator, s: int, eta: float,
                    rng: RngSpec) -> tuple[QuasiMeasurement, bool]:
    """Draw s i.i.d. outcome vectors from a POVM's rank-1 form.

    Vector chi_i is drawn with probability alpha_i / d.  Returns the
    candidate together with whether it satisfies the (s, eta) constraint.
    """
    if s < 1:
        raise ValueError("s must be positive")
    alphas, chis = m.rank_one_form()
    probs = alphas / m.dim
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError("POVM is not complete after rank-1 splitting")
    gen = rng.generator()
    idx = gen.choice(probs.size, size=s, p=probs / total)
    chi = chis[idx]
    ok, _ = validate_quasi(chi, s, eta)
    return QuasiMeasurement(chi, eta=eta, check=False), ok


def quasi_metric(m: QuasiMeasurement, n: QuasiMeasurement) -> float:
    """Index-paired distance sum_i ||chi_i chi_i^dag - nu_i nu_i^dag||_2."""
    if m.s != n.s or m.dim != n.dim:
        raise ValueError("quasi-measurements must share s and dimension")
    overlaps = np.abs(np.einsum("id,id->i", m.chi.conj(), n.chi)) ** 2
    # ||xx^dag - yy^dag||_2 = sqrt(2 - 2 |<x|y>|^2) for unit vectors
    return float(np.sum(np.sqrt(np.clip(2.0 - 2.0 * overlaps, 0.0, None))))


def net_size_bound(d: int, s: int, eps: float) -> float:
    """log2 of the guaranteed net size (10 s / eps)^(2 s d)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if d < 1 or s < 1:
        raise ValueError("d and s must be positive")
    return max(0.0, 2.0 * s * d * math.log2(10.0 * s / eps))


def _sphere_points(d: int, n: int, gen: np.random.Generator) -> np.ndarray:
    v = gen.standard_normal((n, d)) + 1j * gen.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def build_net(d: int, s: int, eps: float, budget: int,
              rng: RngSpec | None = None,
              audit_samples: int = 1000) -> list[QuasiMeasurement]:
    """Random covering net over (s, eta)-quasi-measurements, audited empirically.

    Each unit sphere is covered by random points; net elements are the
    s-fold tuples.  A rejection audit checks that ``audit_samples`` random
    tuples all land within ``eps`` of some net element.  Raises
    BudgetExceededError when the guaranteed count exceeds ``budget``.
    """
    rng = rng or RngSpec(0)
    gen = rng.generator()
    if eps > s * math.sqrt(2.0):
        # radius beyond the set diameter: one element covers everything
        net_chi = _sphere_points(d, s, gen)[None, :, :]
    else:
        log_count = net_size_bound(d, s, eps)
        if log_count > math.log2(budget) + 1e-12:
            raise BudgetExceededError(2.0 ** log_count, budget)
        per_sphere = max(1, int(round((2.0 ** log_count) ** (1.0 / s))))
        points = [_sphere_points(d, per_sphere, gen) for _ in range(s)]
        # assemble the direct product of the per-sphere nets
        idx_grid = np.indices([per_sphere] * s).reshape(s, -1).T
        if idx_grid.shape[0] > budget:
            raise BudgetExceededError(float(idx_grid.shape[0]), budget)
        net_chi = np.stack([np.stack([points[i][j] for i, j in enumerate(row)])
                            for row in idx_grid])
    # covering audit on random tuples, vectorized over net elements
    for _ in range(audit_samples):
        probe = _sphere_points(d, s, gen)
        ov = np.abs(np.einsum("nsd,sd->ns", net_chi.conj(), probe)) ** 2
        dists = np.sqrt(np.clip(2.0 - 2.0 * ov, 0.0, None)).sum(axis=1)
        if dists.min() > eps:
            raise RuntimeError("covering audit failed; net is too sparse")
    return [QuasiMeasurement(c, eta=float(d), check=False) for c in net_chi]


def povm_gap_bound(d_ce: int, s: float, eta: float) -> float:
    """POVM-to-quasi reduction gap 4 d^2 exp(-s (eta-1)^2 / (d 2 ln 2))."""
    if eta <= 1.0:
        raise ValueError("eta must exceed 1")
    if d_ce < 1 or s <= 0:
        raise ValueError("dimension and s must be positive")
    return 4.0 * d_ce * d_ce * math.exp(-s * (eta - 1.0) ** 2 / (d_ce * 2.0 * math.log(2)))


def random_povm(d: int, n_outcomes: int, gen: np.random.Generator) -> MeasurementSuperoperator:
    """A random complete POVM built by normalizing random PSD matrices."""
    raw = []
    for _ in range(n_outcomes):
        z = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
        raw.append(z @ z.conj().T)
    total = np.sum(raw, axis=0)
    lam, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs * lam ** -0.5) @ vecs.conj().T
    return MeasurementSuperoperator(tuple(inv_sqrt @ a @ inv_sqrt for a in raw))
