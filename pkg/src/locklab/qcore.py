"""Core linear-algebra types and operations for multipartite quantum states.

Everything here is representation-level plumbing: subsystem layouts,
density/pure/unitary operator wrappers with validity checks, partial
traces, Schatten norms, purification, the vector-operator reshaping
correspondence, and two norm inequalities used as oracles elsewhere.
All operations are pure functions; the wrapper types are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Eigenvalues down to -PSD_TOL are accepted (and clipped where a spectrum
# is consumed); finite-precision Haar pipelines produce tiny negatives.
PSD_TOL = 1e-9
HERM_TOL = 1e-9
TRACE_TOL = 1e-8
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10


class LayoutError(ValueError):
    """A subsystem label set or dimension bookkeeping error."""


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered collection of named subsystems with their dimensions."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.dims):
            raise LayoutError("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise LayoutError(f"duplicate subsystem labels in {self.labels}")
        if any(d < 1 for d in self.dims):
            raise LayoutError("subsystem dimensions must be positive")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}") from None

    def dim_of(self, labels) -> int:
        return int(np.prod([self.dims[self.axis(l)] for l in labels]))

    def restricted(self, keep) -> "SubsystemLayout":
        keep = set(keep)
        pairs = [(l, d) for l, d in zip(self.labels, self.dims) if l in keep]
        return SubsystemLayout(tuple(l for l, _ in pairs), tuple(d for _, d in pairs))

    @staticmethod
    def single(label: str, dim: int) -> "SubsystemLayout":
        return SubsystemLayout((label,), (dim,))


def _as_layout(layout) -> SubsystemLayout:
    if isinstance(layout, SubsystemLayout):
        return layout
    labels, dims = zip(*layout)
    return SubsystemLayout(tuple(labels), tuple(dims))


@dataclass(frozen=True)
class DensityOperator:
    """Positive semidefinite unit-trace matrix with a subsystem layout."""

    matrix: np.ndarray
    layout: SubsystemLayout
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if m.shape[0] != self.layout.dim:
            raise LayoutError(
                f"matrix dimension {m.shape[0]} != layout dimension {self.layout.dim}"
            )
        if self.check:
            if np.linalg.norm(m - m.conj().T, np.inf) > HERM_TOL * max(1, m.shape[0]):
                raise ValueError("density matrix is not Hermitian within tolerance")
            if abs(np.trace(m).real - 1.0) > TRACE_TOL:
                raise ValueError(f"trace is {np.trace(m).real}, expected 1")
            lo = np.linalg.eigvalsh(m)[0]
            if lo < -PSD_TOL:
                raise ValueError(f"matrix has eigenvalue {lo} < -{PSD_TOL}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, ascending, with tiny negatives clipped to zero."""
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)


@dataclass(frozen=True)
class PureState:
    """Unit vector with a subsystem layout."""

    vector: np.ndarray
    layout: SubsystemLayout
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).ravel()
        object.__setattr__(self, "vector", v)
        if v.size != self.layout.dim:
            raise LayoutError(
                f"vector dimension {v.size} != layout dimension {self.layout.dim}"
            )
        if self.check and abs(np.linalg.norm(v) - 1.0) > NORM_TOL * max(1, v.size):
            raise ValueError("state vector is not normalized")

    @property
    def dim(self) -> int:
        return self.vector.size

    def density(self, check: bool = True) -> DensityOperator:
        return DensityOperator(np.outer(self.vector, self.vector.conj()),
                               self.layout, check=check)


@dataclass(frozen=True)
class UnitaryOperator:
    """Square matrix with a unitarity certificate."""

    matrix: np.ndarray
    layout: SubsystemLayout
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("unitary must be square")
        if m.shape[0] != self.layout.dim:
            raise LayoutError(
                f"matrix dimension {m.shape[0]} != layout dimension {self.layout.dim}"
            )
        if self.check:
            dev = np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), np.inf)
            if dev > UNITARY_TOL * max(1, m.shape[0]):
                raise ValueError(f"U^dag U deviates from identity by {dev}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _axes_of(layout: SubsystemLayout, labels) -> list[int]:
    return [layout.axis(l) for l in labels]


def partial_trace_matrix(m: np.ndarray, dims, keep_axes) -> np.ndarray:
    """Partial trace of a raw matrix over the axes not in ``keep_axes``."""
    n = len(dims)
    keep_axes = sorted(keep_axes)
    traced = [a for a in range(n) if a not in keep_axes]
    t = m.reshape(tuple(dims) * 2)
    perm = (keep_axes + traced + [a + n for a in keep_axes]
            + [a + n for a in traced])
    dkeep = int(np.prod([dims[a] for a in keep_axes])) if keep_axes else 1
    dtr = int(np.prod([dims[a] for a in traced])) if traced else 1
    t = np.transpose(t, perm).reshape(dkeep, dtr, dkeep, dtr)
    return np.einsum("aibi->ab", t)


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Trace out every subsystem not named in ``keep``.

    The result's layout preserves the original ordering of the kept labels.
    """
    keep = set(keep)
    if not keep:
        raise LayoutError("keep set must be nonempty")
    unknown = keep - set(rho.layout.labels)
    if unknown:
        raise LayoutError(f"unknown labels {sorted(unknown)}")
    keep_axes = [i for i, l in enumerate(rho.layout.labels) if l in keep]
    out = partial_trace_matrix(rho.matrix, rho.layout.dims, keep_axes)
    return DensityOperator(out, rho.layout.restricted(keep), check=False)


def schatten_norm(x: np.ndarray, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}: trace, Frobenius, operator norm."""
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    if p == 1:
        return float(np.sum(np.linalg.svd(x, compute_uv=False)))
    if p == 2:
        return float(np.linalg.norm(x))
    if p in (np.inf, "inf", float("inf")):
        return float(np.linalg.norm(x, 2))
    raise ValueError(f"unsupported Schatten order {p!r}")


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """One-norm distance ||rho - sigma||_1, in [0, 2]."""
    if rho.layout != sigma.layout:
        raise LayoutError("trace_distance requires identical layouts")
    diff = rho.matrix - sigma.matrix
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def vec_to_op(v: PureState, from_labels, to_labels) -> np.ndarray:
    """Reshape a bipartite vector into an operator from ``from`` to ``to``.

    With computational product bases in declared label order, the basis
    vector |a_i>|b_j> maps to |b_j><a_i|.  The map is an isometry for the
    2-norm and intertwines unitaries acting on the ``to`` factor.
    """
    from_labels = list(from_labels)
    to_labels = list(to_labels)
    lab = set(v.layout.labels)
    if set(from_labels) | set(to_labels) != lab or set(from_labels) & set(to_labels):
        raise LayoutError("from/to must partition the layout labels")
    # keep declared layout order within each side
    from_side = [l for l in v.layout.labels if l in set(from_labels)]
    to_side = [l for l in v.layout.labels if l in set(to_labels)]
    t = v.vector.reshape(v.layout.dims)
    axes = _axes_of(v.layout, to_side) + _axes_of(v.layout, from_side)
    t = np.transpose(t, axes)
    d_to = v.layout.dim_of(to_side)
    d_from = v.layout.dim_of(from_side)
    return t.reshape(d_to, d_from)


def purify(rho: DensityOperator, ancilla_label: str = "R") -> PureState:
    """Canonical eigendecomposition purification.

    The ancilla has the same dimension as the state (zero-padded beyond the
    rank) so output shapes are deterministic.  The ancilla label is appended
    after the existing labels.
    """
    if ancilla_label in rho.layout.labels:
        ancilla_label = ancilla_label + "'"
        while ancilla_label in rho.layout.labels:
            ancilla_label += "'"
    d = rho.dim
    evals, evecs = np.linalg.eigh(rho.matrix)
    evals = np.clip(evals, 0.0, None)
    # |phi> = sum_k sqrt(lam_k) |u_k> |k>
    vec = (evecs * np.sqrt(evals)).reshape(d * d)  # index order (system, ancilla)
    vec /= np.linalg.norm(vec)
    layout = SubsystemLayout(rho.layout.labels + (ancilla_label,),
                             rho.layout.dims + (d,))
    return PureState(vec, layout, check=False)


def one_norm_entropy_bound(rho: np.ndarray, gamma: np.ndarray,
                           cond_threshold: float = 1e12) -> tuple[float, float]:
    """Both sides of ||rho||_1 <= sqrt(Tr[gamma] Tr[(gamma^{-1/4} rho gamma^{-1/4})^2]).

    ``rho`` must be Hermitian and ``gamma`` strictly positive definite.
    Returns (lhs, rhs).
    """
    rho = np.asarray(rho, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    evals, evecs = np.linalg.eigh(gamma)
    if evals[0] <= 0 or evals[-1] / evals[0] > cond_threshold:
        raise ValueError("gamma is singular or too ill-conditioned")
    g_m14 = (evecs * evals ** -0.25) @ evecs.conj().T
    core = g_m14 @ rho @ g_m14
    lhs = schatten_norm(rho, 1)
    rhs = float(np.sqrt(np.trace(gamma).real * np.trace(core @ core).real))
    return lhs, rhs


def pure_one_two_bound(phi: PureState, psi: PureState) -> tuple[float, float]:
    """Both sides of ||phi phi^dag - psi psi^dag||_1 <= 2 || |phi> - |psi> ||_2."""
    if phi.layout != psi.layout:
        raise LayoutError("states must share a layout")
    diff = np.outer(phi.vector, phi.vector.conj()) - np.outer(psi.vector, psi.vector.conj())
    lhs = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    rhs = 2.0 * float(np.linalg.norm(phi.vector - psi.vector))
    return lhs, rhs
