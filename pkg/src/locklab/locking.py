"""Locking schemes: state construction, distinguishability, bounds, thresholds.

A scheme encodes a classical message into a cyphertext/key pair by a
unitary on C (x) K (x) E, where E carries half of an entangled resource
shared with the measuring device.  The central functional is

    g_M(U) = || M(rho^{MCE'}) - M(rho^M (x) rho^{CE'}) ||_1,

the distance of measured message/outcome correlations from independence.
This module evaluates g exactly for POVMs and quasi-measurements, the
analytic expectation and Lipschitz bounds that control it, the
concentration-theorem right-hand sides, the key-size threshold
calculators, and numerical optimizers over measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import _eta, alicki_fannes_bound, entropy
from .haar import RngSpec, haar_batch
from .measure import MeasurementSuperoperator, QuasiMeasurement, outcome_weights
from .qcore import DensityOperator, PureState, SubsystemLayout, UnitaryOperator

LOG2 = math.log(2.0)

THRESHOLD_KINDS = ("thm_locking", "cor_unihigh", "cor_modmod",
                   "cor_unihighPOVM", "cor_modmodPOVM", "thm_decode")


class SideConditionError(ValueError):
    """A threshold or concentration side condition is violated."""


@dataclass(frozen=True)
class LockingScheme:
    """Dimensions, message distribution, basis, encoding unitary, resource state.

    ``message_basis`` holds |psi_m> as columns of a (C*K, M) matrix;
    ``omega`` is a pure state on E (x) E' given by its Schmidt vector over
    the computational-product diagonal (length E), so E' = E.
    """

    dims: tuple[int, int, int]  # (C, K, E)
    p: np.ndarray
    message_basis: np.ndarray
    unitary: np.ndarray
    schmidt: np.ndarray
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        c, k, e = self.dims
        p = np.asarray(self.p, dtype=float)
        basis = np.asarray(self.message_basis, dtype=complex)
        u = np.asarray(self.unitary, dtype=complex)
        sch = np.asarray(self.schmidt, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "message_basis", basis)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "schmidt", sch)
        m = c * k
        if p.shape != (m,):
            raise ValueError(f"p must have length M = C*K = {m}")
        if basis.shape != (m, m):
            raise ValueError(f"message basis must be ({m}, {m})")
        if u.shape != (m * e, m * e):
            raise ValueError(f"unitary must act on C*K*E = {m * e}")
        if sch.shape != (e,):
            raise ValueError(f"schmidt vector must have length E = {e}")
        if self.check:
            if abs(p.sum() - 1.0) > 1e-10 or np.any(p < -1e-12):
                raise ValueError("p must be a probability vector")
            if np.linalg.norm(basis.conj().T @ basis - np.eye(m), np.inf) > 1e-10 * m:
                raise ValueError("message basis is not orthonormal within tolerance")
            if np.linalg.norm(u.conj().T @ u - np.eye(m * e), np.inf) > 1e-9 * m * e:
                raise ValueError("encoding unitary fails the unitarity check")
            if abs(np.sum(sch ** 2) - 1.0) > 1e-10:
                raise ValueError("schmidt coefficients must be normalized")

    @property
    def c_dim(self) -> int:
        return self.dims[0]

    @property
    def k_dim(self) -> int:
        return self.dims[1]

    @property
    def e_dim(self) -> int:
        return self.dims[2]

    @property
    def m_dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def ep_dim(self) -> int:
        """Dimension of E', equal to E in this parametrization."""
        return self.dims[2]

    def omega_vector(self) -> np.ndarray:
        """The resource state |omega>^{EE'} as a flat vector."""
        e = self.e_dim
        w = np.zeros(e * e, dtype=complex)
        w[np.arange(e) * e + np.arange(e)] = self.schmidt
        return w

    def omega_marginal(self) -> DensityOperator:
        """omega^E, diagonal with the squared Schmidt coefficients."""
        return DensityOperator(np.diag(self.schmidt.astype(complex) ** 2),
                               SubsystemLayout.single("E", self.e_dim), check=False)

    def message_marginal(self) -> DensityOperator:
        return DensityOperator(np.diag(self.p.astype(complex)),
                               SubsystemLayout.single("M", self.m_dim), check=False)

    def deltas(self) -> dict[str, float]:
        """The four uniformity/entanglement deficits of the scheme."""
        m, e = self.m_dim, self.e_dim
        pm = self.p[self.p > 1e-15]
        lam = self.schmidt[self.schmidt > 1e-15] ** 2
        return {
            "M_inf": m * pm.max(),
            "M_2": m * float(np.sum(pm ** 2)),
            "E_inf": e * lam.max(),
            "E_2": e * float(np.sum(lam ** 2)),
        }

    def conditional_cyphertext_states(self) -> np.ndarray:
        """rho_m^{CE'} for every message, stacked as (M, C*E', C*E')."""
        c, k, e = self.dims
        ep = self.ep_dim
        omega = self.omega_vector().reshape(e, ep)
        out = np.empty((self.m_dim, c * ep, c * ep), dtype=complex)
        for m in range(self.m_dim):
            psi = self.message_basis[:, m].reshape(c * k)
            joint = np.einsum("a,bc->abc", psi, omega).reshape(c * k * e, ep)
            after = (self.unitary @ joint).reshape(c, k, e, ep)
            w = after.transpose(0, 3, 1, 2).reshape(c * ep, k * e)
            out[m] = w @ w.conj().T
        return out

    @staticmethod
    def random(c: int, k: int, e: int = 1, rng: RngSpec | None = None,
               p: np.ndarray | None = None, schmidt: np.ndarray | None = None,
               basis: np.ndarray | None = None,
               unitary: np.ndarray | None = None) -> "LockingScheme":
        """A scheme with Haar-random encoding and maximal entanglement defaults."""
        m = c * k
        if p is None:
            p = np.full(m, 1.0 / m)
        if schmidt is None:
            schmidt = np.full(e, 1.0 / math.sqrt(e))
        if basis is None:
            basis = np.eye(m, dtype=complex)
        if unitary is None:
            gen = (rng or RngSpec(0)).generator()
            unitary = haar_batch(m * e, 1, gen)[0]
        return LockingScheme((c, k, e), p, basis, unitary, schmidt)


def _scheme_layout(scheme: LockingScheme, labels: str) -> SubsystemLayout:
    dims = {"M": scheme.m_dim, "C": scheme.c_dim, "K": scheme.k_dim,
            "E": scheme.e_dim, "F": scheme.ep_dim}  # F stands in for E'
    parts = labels.split()
    return SubsystemLayout(tuple(parts), tuple(dims[l] for l in parts))


def build_sigma(scheme: LockingScheme) -> DensityOperator:
    """sigma = sum_m p_m |m><m| (x) |psi_m><psi_m| on M (x) C (x) K."""
    m_dim = scheme.m_dim
    dim = m_dim * m_dim
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(m_dim):
        psi = scheme.message_basis[:, m]
        block = scheme.p[m] * np.outer(psi, psi.conj())
        out[m * m_dim:(m + 1) * m_dim, m * m_dim:(m + 1) * m_dim] = block
    return DensityOperator(out, _scheme_layout(scheme, "M C K"), check=False)


def build_rho(scheme: LockingScheme) -> DensityOperator:
    """The post-encoding state on M (x) C (x) K (x) E (x) E'."""
    c, k, e = scheme.dims
    ep = scheme.ep_dim
    m_dim = scheme.m_dim
    d_cke = c * k * e
    omega = scheme.omega_vector()
    dim = m_dim * d_cke * ep
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(m_dim):
        psi = scheme.message_basis[:, m]
        vec = np.einsum("a,b->ab", psi, omega).reshape(c * k, e, ep)
        vec = vec.reshape(d_cke, ep).reshape(d_cke * ep)
        vec = (np.kron(scheme.unitary, np.eye(ep)) @ vec)
        block = scheme.p[m] * np.outer(vec, vec.conj())
        lo = m * d_cke * ep
        out[lo:lo + d_cke * ep, lo:lo + d_cke * ep] = block
    return DensityOperator(out, _scheme_layout(scheme, "M C K E F"), check=False)


def measured_joint(scheme: LockingScheme, m) -> np.ndarray:
    """Joint weight table q[message, outcome] under a measurement on C (x) E'."""
    rhos = scheme.conditional_cyphertext_states()
    q = np.stack([outcome_weights(m, rhos[i]) for i in range(scheme.m_dim)])
    return scheme.p[:, None] * q


def _joint_to_g(q: np.ndarray) -> float:
    p_m = q.sum(axis=1)
    p_x = q.sum(axis=0)
    return float(np.abs(q - np.outer(p_m, p_x)).sum())


def distinguishability(scheme: LockingScheme, m) -> float:
    """Exact g_M(U): the 1-norm distance of measured correlations from product.

    Both measured operators are diagonal in the (message, outcome) product
    basis, so the 1-norm is the elementwise absolute sum.  For a true
    measurement this is the classical l1 distance between the joint
    distribution and the product of its marginals.
    """
    if isinstance(m, (MeasurementSuperoperator, QuasiMeasurement)):
        need = scheme.c_dim * scheme.ep_dim
        if m.dim != need:
            raise ValueError(f"measurement must act on C*E' = {need}")
    q = measured_joint(scheme, m)
    return _joint_to_g(q)


def expectation_bound(scheme: LockingScheme) -> float:
    """Haar-expectation bound 2 Delta_{E,inf} / sqrt(K E) on g for fixed measurements."""
    d = scheme.deltas()
    return 2.0 * d["E_inf"] / math.sqrt(scheme.k_dim * scheme.e_dim)


def lipschitz_constant(scheme: LockingScheme, side: str,
                       s: int | None = None, eta: float | None = None) -> float:
    """Lipschitz constant of g in the unitary, or of h_U in the measurement.

    Unitary side (Hilbert-Schmidt metric): 4 eta sqrt(Delta_{M,inf}
    Delta_{E,inf} / (M E)).  Measurement side (tuple metric):
    (2 sqrt(C E') / s) sqrt(Delta_{M,2} Delta_{E,2}).
    """
    d = scheme.deltas()
    if side == "unitary":
        if eta is None:
            raise ValueError("unitary side needs the measurement's eta")
        return 4.0 * eta * math.sqrt(d["M_inf"] * d["E_inf"]
                                     / (scheme.m_dim * scheme.e_dim))
    if side == "measurement":
        if s is None:
            raise ValueError("measurement side needs s")
        return (2.0 * math.sqrt(scheme.c_dim * scheme.ep_dim) / s
                * math.sqrt(d["M_2"] * d["E_2"]))
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class ThresholdInput:
    """Qubit counts, tolerance, and entropy inputs for the threshold calculators.

    All sizes are in qubits (base-2 logs of dimensions) and entropies in
    bits.  ``k`` must equal ``n - c`` when evaluating locking corollaries.
    """

    n: float
    c: float
    e: float
    eps: float
    k: float | None = None
    p_fail: float = 0.0
    hmin_M: float | None = None
    hmin_E: float | None = None
    hmax_M: float | None = None
    h2_E: float | None = None

    def __post_init__(self):
        if not 0.0 < self.eps <= 2.0:
            raise ValueError("eps must lie in (0, 2]")
        if self.k is None:
            object.__setattr__(self, "k", self.n - self.c)
        # uniform message / maximal entanglement defaults
        if self.hmin_M is None:
            object.__setattr__(self, "hmin_M", self.n)
        if self.hmin_E is None:
            object.__setattr__(self, "hmin_E", self.e)
        if self.hmax_M is None:
            object.__setattr__(self, "hmax_M", self.n)
        if self.h2_E is None:
            object.__setattr__(self, "h2_E", self.e)

    @property
    def delta_e_inf(self) -> float:
        return 2.0 ** (self.e - self.hmin_E)

    @property
    def delta_m_inf(self) -> float:
        return 2.0 ** (self.n - self.hmin_M)

    @property
    def delta_e_2(self) -> float:
        return 2.0 ** (self.e - self.h2_E)


def _require(cond: bool, desc: str):
    if not cond:
        raise SideConditionError(f"side condition violated: {desc}")


def concentration_bound(t: ThresholdInput, variant: str,
                        s: float | None = None, eta: float | None = None) -> float:
    """Right-hand side of the concentration theorem, clamped to [0, 1].

    ``variant`` is "quasi" (explicit s, eta over quasi-measurements) or
    "povm" (s and eta fixed to the general-measurement proof's choices
    s = (6 ln 2) CE ln CE, eta = 2).  Delta_{M,2} is conservatively
    replaced by Delta_{M,inf} since only min-entropy data is supplied.
    """
    ce = 2.0 ** (t.c + t.e)
    cke = 2.0 ** (t.c + t.k + t.e)
    ke = 2.0 ** (t.k + t.e)
    dm_inf, de_inf = t.delta_m_inf, t.delta_e_inf
    dm2, de2 = dm_inf, t.delta_e_2
    if variant == "quasi":
        if s is None or eta is None:
            raise ValueError("quasi variant needs s and eta")
        offset = 4.0 * de_inf / math.sqrt(ke)
        _require(t.eps > offset, f"eps <= 4 Delta_E,inf / sqrt(KE) = {offset:.4g}")
        first = 2.0 * s * ce * math.log(40.0 * math.sqrt(ce * dm2 * de2) / t.eps)
        second = (cke ** 2 / (2.0 ** 8 * eta * eta * dm_inf * de_inf)
                  * (t.eps - offset) ** 2)
    elif variant == "povm":
        offset = 8.0 * de_inf / math.sqrt(ke)
        _require(t.eps > offset, f"eps <= 8 Delta_E,inf / sqrt(KE) = {offset:.4g}")
        first = (9.0 * ce * ce * math.log(ce)
                 * math.log(40.0 * math.sqrt(ce * dm2 * de2) / t.eps))
        second = (cke ** 2 / (2.0 ** 10 * dm_inf * de_inf)
                  * (t.eps - offset) ** 2)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    exponent = first - second
    if exponent >= 0:
        return 1.0
    return math.exp(exponent) if exponent > -745 else 0.0


def key_threshold(t: ThresholdInput, which: str) -> float:
    """Key-size threshold (bits) for each locking statement, or max k for decoding.

    Locking variants return the lower bound on k; ``thm_decode`` returns
    the upper bound on k for decodability to within eps.
    """
    if which not in THRESHOLD_KINDS:
        raise ValueError(f"unknown threshold {which!r}")
    log2 = math.log2
    l_eps = log2(1.0 / t.eps)
    if which == "thm_locking":
        value = (0.5 * (t.n - t.hmin_M) + 0.5 * (t.e - t.hmin_E)
                 + log2(t.c + t.e) + 2.0 * l_eps + 11.0)
        coeff, delta = 16.0, t.delta_e_inf
        cond = "eps <= 16 Delta_E,inf / sqrt(KE)"
    elif which == "cor_unihigh":
        value = 9.0 + 2.0 * l_eps + 0.5 * log2(t.c + t.e)
        coeff, delta = 8.0, 1.0
        cond = "eps <= 8 / sqrt(KE)"
    elif which == "cor_modmod":
        value = (9.0 + 2.0 * l_eps + 0.5 * log2(t.c + t.e)
                 + 0.5 * (t.n - t.hmin_M) + 0.5 * (t.e - t.hmin_E))
        coeff, delta = 8.0, t.delta_e_inf
        cond = "eps <= 8 Delta_E,inf / sqrt(KE)"
    elif which == "cor_unihighPOVM":
        value = 11.0 + 2.0 * l_eps + log2(t.c + t.e)
        coeff, delta = 16.0, 1.0
        cond = "eps <= 16 / sqrt(KE)"
    elif which == "cor_modmodPOVM":
        value = (11.0 + 2.0 * l_eps + log2(t.c + t.e)
                 + 0.5 * (t.n - t.hmin_M) + 0.5 * (t.e - t.hmin_E))
        coeff, delta = 16.0, t.delta_e_inf
        cond = "eps <= 16 Delta_E,inf / sqrt(KE)"
    else:  # thm_decode has no side condition
        return (0.5 * (t.n - t.hmax_M) - 0.5 * (t.e - t.h2_E)
                - 2.0 * l_eps - 4.0)
    # the corollaries apply to key sizes at or above the returned value, so
    # the side condition is checked at the larger of the input k and the
    # threshold itself
    k_eff = max(t.k if t.k is not None else value, value)
    ke = 2.0 ** (k_eff + t.e)
    _require(t.eps > coeff * delta / math.sqrt(ke), cond)
    return value


def modmod_warning(t: ThresholdInput) -> str | None:
    """The bounded-entropy corollary quietly assumes k < c; surface it."""
    if t.k is not None and t.k >= t.c:
        return f"k = {t.k} >= c = {t.c}: outside the corollary's implicit regime"
    return None


@dataclass(frozen=True)
class OptimizerReport:
    best_value: float
    best_measurement: object
    restarts: int
    trace: tuple


def _ascend_projective(d_stack: np.ndarray, p: np.ndarray, w0: np.ndarray,
                       grad_fn, value_fn, max_iter: int = 80,
                       tol: float = 1e-9) -> tuple[float, np.ndarray, list[float]]:
    """Riemannian gradient ascent over orthonormal measurement bases.

    ``w0`` is the initial basis (columns); ``grad_fn(w)`` returns the
    Euclidean gradient with respect to conj(w); ``value_fn(w)`` the
    objective.  Ascent moves along W exp(tau Omega) with Omega the
    skew-Hermitian projection of the gradient, with backtracking.
    """
    w = w0
    val = value_fn(w)
    history = [val]
    tau = 0.5
    for _ in range(max_iter):
        g = grad_fn(w)
        z = w.conj().T @ g
        omega = 0.5 * (z - z.conj().T)
        nrm = np.linalg.norm(omega)
        if nrm < 1e-12:
            break
        herm = 1j * omega  # Hermitian; exp(tau Omega) = V exp(-1j tau lam) V^dag
        lam, vecs = np.linalg.eigh(herm)
        improved = False
        for _ in range(20):
            step = vecs @ (np.exp(-1j * tau * lam)[:, None] * vecs.conj().T)
            w_new = w @ step
            v_new = value_fn(w_new)
            if v_new > val + 1e-14:
                improved = True
                break
            tau *= 0.5
        if not improved:
            break
        if v_new - val < tol and len(history) > 5:
            w, val = w_new, v_new
            history.append(val)
            break
        w, val = w_new, v_new
        history.append(val)
        tau = min(tau * 2.0, 2.0)
    return val, w, history


def _g_value_and_grad(rhos: np.ndarray, p: np.ndarray):
    """Closures computing g and its basis gradient for projective measurements."""
    rho_bar = np.einsum("m,mij->ij", p, rhos)
    d_stack = rhos - rho_bar[None]

    def value(w):
        q = p[:, None] * np.einsum("mij,jd,id->md", rhos, w, w.conj()).real
        return _joint_to_g(q)

    def grad(w):
        dev = p[:, None] * np.einsum("mij,jd,id->md", d_stack, w, w.conj()).real
        signs = np.sign(dev)
        b = np.einsum("mi,mjk->ijk", signs * p[:, None], d_stack)
        return np.einsum("ijk,ki->ji", b, w.T)

    return value, grad


def optimize_distinguishability(scheme: LockingScheme, strategy: str,
                                restarts: int, rng: RngSpec,
                                net_budget: int = 10 ** 6,
                                net_eps: float = 0.5) -> OptimizerReport:
    """Search for the best measurement; the result is a certified lower bound.

    Strategies: ``projective_gradient`` (Riemannian ascent over bases from
    Haar-random starts), ``quasi_random`` (best of random projective
    bases), ``net_exhaustive`` (evaluate every element of a covering net,
    feasible only at tiny dimension).
    """
    from .measure import build_net

    c = scheme.c_dim
    ep = scheme.ep_dim
    rhos = scheme.conditional_cyphertext_states()
    # restrict to the support of omega^{E'}: outcomes outside it carry no weight
    support = np.flatnonzero(scheme.schmidt > 1e-12)
    ns = support.size
    if ns < ep:
        r5 = rhos.reshape(-1, c, ep, c, ep)
        rhos = r5[:, :, support][:, :, :, :, support].reshape(-1, c * ns, c * ns)
    d = c * ns
    p = scheme.p
    value_fn, grad_fn = _g_value_and_grad(rhos, p)
    trace = []
    best_val, best_w = -1.0, None
    if strategy == "projective_gradient":
        starts = []
        rho_bar = np.einsum("m,mij->ij", p, rhos)
        starts.append(np.linalg.eigh(rho_bar)[1].astype(complex))
        if p.size >= 2:
            # pairwise-difference eigenbases: optimal for two-state ensembles
            helstrom = p[0] * rhos[0] - p[-1] * rhos[-1]
            starts.append(np.linalg.eigh(helstrom)[1].astype(complex))
        for r in range(restarts):
            gen = rng.stream(rng.stream_index * max(1, restarts) + r).generator()
            starts.append(haar_batch(d, 1, gen)[0])
        for w0 in starts:
            val, w, hist = _ascend_projective(None, p, w0, grad_fn, value_fn)
            trace.append(val)
            if val > best_val:
                best_val, best_w = val, w
    elif strategy == "quasi_random":
        gen = rng.generator()
        for _ in range(restarts):
            w = haar_batch(d, 1, gen)[0]
            val = value_fn(w)
            trace.append(val)
            if val > best_val:
                best_val, best_w = val, w
    elif strategy == "net_exhaustive":
        net = build_net(d, d, net_eps, net_budget, rng=rng, audit_samples=100)
        for el in net:
            q = p[:, None] * np.stack([outcome_weights(el, rhos[i])
                                       for i in range(p.size)])
            val = _joint_to_g(q)
            trace.append(val)
            if val > best_val:
                best_val = val
                best_w = el
        # also include the computational basis as a certified candidate
        val = value_fn(np.eye(d, dtype=complex))
        if val > best_val:
            best_val, best_w = val, np.eye(d, dtype=complex)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if isinstance(best_w, np.ndarray) and ns < ep:
        # embed back into the ambient C (x) E' space and complete the basis
        full = np.zeros((c * ep, c * ep), dtype=complex)
        rows = (np.arange(c)[:, None] * ep + support[None, :]).ravel()
        full[np.ix_(rows, np.arange(d))] = best_w.reshape(c * ns, d)
        dead = np.setdiff1d(np.arange(c * ep), rows)
        full[dead, d + np.arange(dead.size)] = 1.0
        best_w = full
    if isinstance(best_w, np.ndarray):
        best_m = QuasiMeasurement.projective(best_w)
    else:
        best_m = best_w
    return OptimizerReport(best_value=float(best_val), best_measurement=best_m,
                           restarts=restarts, trace=tuple(trace))


def _cq_blocks(rho: DensityOperator, m_label: str = "M"):
    """Split a cq state into (p_m, rho_m) blocks; errors if M is not classical."""
    if m_label not in rho.layout.labels:
        raise ValueError(f"layout has no {m_label!r} subsystem")
    ax = rho.layout.axis(m_label)
    dims = rho.layout.dims
    m_dim = dims[ax]
    rest = [d for i, d in enumerate(dims) if i != ax]
    d_b = int(np.prod(rest)) if rest else 1
    t = rho.matrix.reshape(tuple(dims) * 2)
    n = len(dims)
    t = np.moveaxis(t, (ax, ax + n), (0, 1))
    t = t.reshape(m_dim, m_dim, d_b, d_b)
    off = max(np.abs(t[i, j]).max() for i in range(m_dim)
              for j in range(m_dim) if i != j) if m_dim > 1 else 0.0
    if off > 1e-9:
        raise ValueError("state is not classical on the message register")
    p = np.array([np.trace(t[i, i]).real for i in range(m_dim)])
    rhos = np.stack([t[i, i] / p[i] if p[i] > 1e-15 else np.eye(d_b) / d_b
                     for i in range(m_dim)])
    return p, rhos


def _mi_value_and_grad(rhos: np.ndarray, p: np.ndarray):
    """Closures for I(X;M) in bits under projective measurements on the B side."""

    def joint(w):
        q = p[:, None] * np.einsum("mij,jd,id->md", rhos, w, w.conj()).real
        return np.clip(q, 0.0, None)

    def value(w):
        q = joint(w)
        qx = q.sum(axis=0)
        qm = q.sum(axis=1)
        mask = q > 1e-15
        ratio = np.where(mask, q / np.outer(qm, qx).clip(1e-300), 1.0)
        return float(np.sum(q[mask] * np.log2(ratio[mask])))

    def grad(w):
        q = joint(w)
        qx = q.sum(axis=0)
        mask = q > 1e-15
        logterm = np.where(mask, np.log2(np.where(mask, q, 1.0))
                           - np.log2(np.outer(q.sum(axis=1), qx).clip(1e-300)), 0.0)
        b = np.einsum("mi,m,mjk->ijk", logterm, p, rhos)
        return np.einsum("ijk,ki->ji", b, w.T)

    return value, grad


def estimate_accessible_info(rho: DensityOperator, restarts: int,
                             rng: RngSpec, m_label: str = "M") -> float:
    """Lower bound on the accessible information of a cq state, in bits.

    Optimizes I(X;M) over projective measurements on the quantum side by
    gradient ascent from Haar-random starts plus the eigenbasis of the
    average state.
    """
    p, rhos = _cq_blocks(rho, m_label)
    d = rhos.shape[1]
    value_fn, grad_fn = _mi_value_and_grad(rhos, p)
    best = 0.0
    starts = []
    rho_bar = np.einsum("m,mij->ij", p, rhos)
    starts.append(np.linalg.eigh(rho_bar)[1])
    # eigenbasis of a typical difference is a good seed for near-commuting blocks
    if rhos.shape[0] >= 2:
        starts.append(np.linalg.eigh(rhos[0] - rhos[-1])[1])
    for r in range(restarts):
        gen = rng.stream(rng.stream_index * max(1, restarts) + r).generator()
        starts.append(haar_batch(d, 1, gen)[0])
    for w0 in starts:
        val, _, _ = _ascend_projective(None, p, w0.astype(complex),
                                       grad_fn, value_fn)
        best = max(best, val)
    return best


def accessible_info_cap(eps: float, m: int) -> float:
    """Accessible-information upper bound implied by a distinguishability value."""
    return alicki_fannes_bound(min(1.0, eps), m)
