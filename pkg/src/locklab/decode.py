"""Decodability: recovering the message from the cyphertext without the key.

The complementary regime to locking.  Here the encoding acts as
U: N (x) E -> C (x) D, the registers D are discarded, and the question is
whether a channel on C (x) E' can restore the message state.  When the
discarded dimension is small enough the cyphertext decouples from the
purifying reference, and a decoder exists by the constructive form of the
fidelity/purification-overlap equality: purify both sides, match the
purifications by the polar unitary of their cross overlap, and trace the
garbage register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .haar import RngSpec, haar_batch
from .locking import ThresholdInput
from .qcore import schatten_norm


def guessing_error_bound(m_dim: int, c_dim: int) -> float:
    """Average bound sqrt(M/C) on the deficit of guessing the message from C."""
    if c_dim < 1:
        raise ValueError("C must be positive")
    return math.sqrt(m_dim / c_dim)


def purified_guessing_bound(m_dim: int, c_dim: int) -> float:
    """Bound 2 sqrt(M/C) on the trace-norm error of coherent decoding."""
    return 2.0 * math.sqrt(m_dim / c_dim)


def decoupling_bound(hmax_m: float, h2_e: float, d_dim: int, c_dim: int) -> float:
    """Expected distance 2^{(Hmax(M) - H2(E))/2} sqrt(D/C) from decoupled form."""
    if c_dim < 1 or d_dim < 1:
        raise ValueError("C and D must be positive")
    return 2.0 ** (0.5 * hmax_m - 0.5 * h2_e) * math.sqrt(d_dim / c_dim)


def decode_error_bound(hmax_m: float, h2_e: float, d_dim: int, c_dim: int) -> float:
    """End-to-end expected decoding error 4 (2^{Hmax(M)-H2(E)} D/C)^{1/4}."""
    return 4.0 * (2.0 ** (hmax_m - h2_e) * d_dim / c_dim) ** 0.25


def decode_threshold(t: ThresholdInput) -> float:
    """Largest key size (bits) with expected recovery error below eps."""
    return (0.5 * (t.n - t.hmax_M) - 0.5 * (t.e - t.h2_E)
            - 2.0 * math.log2(1.0 / t.eps) - 4.0)


def threshold_gap(t: ThresholdInput) -> float:
    """Gap between the POVM locking threshold and the decoding threshold.

    Evaluates to (1/2)(Hmax(M) - Hmin(M)) + (e - Hmin(E)) + log2(c+e)
    + 4 log2(1/eps) + 15 after bounding the collision entropy of the
    resource below by its min-entropy.
    """
    return (0.5 * (t.hmax_M - t.hmin_M) + (t.e - t.hmin_E)
            + math.log2(t.c + t.e) + 4.0 * math.log2(1.0 / t.eps) + 15.0)


@dataclass(frozen=True)
class DecodeScenario:
    """Encoding U: N (x) E -> C (x) D with a message ensemble on N.

    ``basis`` holds |psi_m> as columns of an (N, M) matrix; ``schmidt``
    parametrizes the resource |omega> on E (x) E' over the diagonal, so
    E' = E.  Requires N*E = C*D.
    """

    n_dim: int
    e_dim: int
    c_dim: int
    d_dim: int
    p: np.ndarray
    basis: np.ndarray
    unitary: np.ndarray
    schmidt: np.ndarray
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        basis = np.asarray(self.basis, dtype=complex)
        u = np.asarray(self.unitary, dtype=complex)
        sch = np.asarray(self.schmidt, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "schmidt", sch)
        if self.n_dim * self.e_dim != self.c_dim * self.d_dim:
            raise ValueError("dimension mismatch: N*E must equal C*D")
        ne = self.n_dim * self.e_dim
        if u.shape != (ne, ne):
            raise ValueError(f"unitary must be ({ne}, {ne})")
        if basis.shape[0] != self.n_dim or basis.shape[1] != p.shape[0]:
            raise ValueError("basis must be (N, M) with M = len(p)")
        if sch.shape != (self.e_dim,):
            raise ValueError("schmidt vector must have length E")
        if self.check:
            if abs(p.sum() - 1.0) > 1e-10 or np.any(p < -1e-12):
                raise ValueError("p must be a probability vector")
            gram = basis.conj().T @ basis
            if np.linalg.norm(gram - np.eye(p.shape[0]), np.inf) > 1e-10 * ne:
                raise ValueError("message vectors are not orthonormal")
            if np.linalg.norm(u.conj().T @ u - np.eye(ne), np.inf) > 1e-9 * ne:
                raise ValueError("encoding fails the unitarity check")
            if abs(np.sum(sch ** 2) - 1.0) > 1e-10:
                raise ValueError("schmidt coefficients must be normalized")

    @property
    def m_count(self) -> int:
        return self.p.shape[0]

    @property
    def ep_dim(self) -> int:
        return self.e_dim

    @staticmethod
    def random(n_dim: int, e_dim: int, c_dim: int, rng: RngSpec) -> "DecodeScenario":
        """Haar encoding, uniform messages filling N, maximal entanglement."""
        d_dim = n_dim * e_dim // c_dim
        gen = rng.generator()
        return DecodeScenario(
            n_dim, e_dim, c_dim, d_dim,
            p=np.full(n_dim, 1.0 / n_dim),
            basis=np.eye(n_dim, dtype=complex),
            unitary=haar_batch(n_dim * e_dim, 1, gen)[0],
            schmidt=np.full(e_dim, e_dim ** -0.5) if e_dim > 1
            else np.ones(1))


@dataclass(frozen=True)
class DecoderChannel:
    """xi on C (x) E' -> Tr_G[V xi V^dag] with V mapping to N (x) G."""

    isometry: np.ndarray
    n_dim: int
    g_dim: int
    discard: str = "G"

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=complex)
        object.__setattr__(self, "isometry", v)
        if v.shape[0] != self.n_dim * self.g_dim:
            raise ValueError("isometry rows must span N*G")
        err = np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1]), 2)
        if err > 1e-9 * max(1, v.shape[1]):
            raise ValueError("isometry check V^dag V = I failed")

    def apply(self, xi: np.ndarray) -> np.ndarray:
        """Decode a state on C (x) E' and trace out the garbage register."""
        out = self.isometry @ xi @ self.isometry.conj().T
        t = out.reshape(self.n_dim, self.g_dim, self.n_dim, self.g_dim)
        return np.einsum("agbg->ab", t)


def _global_vector(scenario: DecodeScenario) -> np.ndarray:
    """|Psi> on R (x) M (x) D (x) (C E'), with R, M mirroring the messages.

    Returned with shape (M, M, D, C*E'); the (r, m) slice is the encoded
    conditional vector scaled by sqrt(p_m) delta_{rm}.
    """
    n, e, c, d = scenario.n_dim, scenario.e_dim, scenario.c_dim, scenario.d_dim
    ep = scenario.ep_dim
    mm = scenario.m_count
    out = np.zeros((mm, mm, d, c * ep), dtype=complex)
    for m in range(mm):
        joint = np.zeros((n, e, ep), dtype=complex)
        joint[:, np.arange(e), np.arange(e)] = (scenario.basis[:, m][:, None]
                                                * scenario.schmidt[None, :])
        after = (scenario.unitary @ joint.reshape(n * e, ep)).reshape(c, d, ep)
        out[m, m] = math.sqrt(scenario.p[m]) * after.transpose(1, 0, 2).reshape(
            d, c * ep)
    return out


def build_decoder(scenario: DecodeScenario) -> DecoderChannel:
    """The best unitary decoder on C (x) E' by matched purifications.

    Maximizes the overlap of the decoded global purification with the
    ideal output sigma^{RMN} (x) theta^{DG}, where theta is the
    eigendecomposition purification of the discarded registers' state.
    The maximum over unitaries is the polar factor of the cross overlap
    matrix, obtained from its singular decomposition.
    """
    n, c, d = scenario.n_dim, scenario.c_dim, scenario.d_dim
    ep = scenario.ep_dim
    mm = scenario.m_count
    ce = c * ep
    if ce % n:
        raise ValueError("C*E' must be divisible by N")
    g = ce // n
    if g < d:
        raise ValueError("garbage register too small to absorb the reference")
    psi = _global_vector(scenario).reshape(mm * mm * d, ce)
    # rho^D and its purification theta (D x D), embedded in (D x G)
    psi_d = psi.reshape(mm * mm, d, ce)
    rho_d = np.einsum("rda,rea->de", psi_d, psi_d.conj())
    evals, evecs = np.linalg.eigh(rho_d)
    theta = (evecs * np.sqrt(np.clip(evals, 0.0, None))).astype(complex)
    sigma = np.zeros((mm, mm, n), dtype=complex)
    for m in range(mm):
        sigma[m, m] = math.sqrt(scenario.p[m]) * scenario.basis[:, m]
    # target matrix over (R M D) x (N G)
    tgt = np.einsum("rmn,dg->rmdng", sigma, theta).reshape(
        mm * mm * d, n, d)
    tgt_full = np.zeros((mm * mm * d, n, g), dtype=complex)
    tgt_full[:, :, :d] = tgt
    tgt_full = tgt_full.reshape(mm * mm * d, n * g)
    a = np.einsum("ra,rb->ab", psi, tgt_full.conj())
    u_l, _, v_r = np.linalg.svd(a)
    v = (u_l @ v_r).conj().T
    return DecoderChannel(isometry=v, n_dim=n, g_dim=g)


def _decoded_state(scenario: DecodeScenario, decoder: DecoderChannel):
    """The decoded state on R (x) M (x) N and the ideal target vector."""
    mm = scenario.m_count
    n, d, g = scenario.n_dim, scenario.d_dim, decoder.g_dim
    psi = _global_vector(scenario)  # (M, M, D, CE')
    out = np.einsum("ba,rmda->rmdb", decoder.isometry, psi).reshape(
        mm, mm, d, n, g)
    rho = np.einsum("rmdng,svdwg->rmnsvw", out, out.conj()).reshape(
        mm * mm * n, mm * mm * n)
    sigma = np.zeros((mm, mm, n), dtype=complex)
    for m in range(mm):
        sigma[m, m] = math.sqrt(scenario.p[m]) * scenario.basis[:, m]
    return rho, sigma.reshape(mm * mm * n), out


def evaluate_decoder(scenario: DecodeScenario, decoder: DecoderChannel) -> float:
    """Exact 1-norm distance of the decoded state from the ideal message copy."""
    if decoder.n_dim != scenario.n_dim:
        raise ValueError("decoder output dimension does not match the scenario")
    rho, sigma, _ = _decoded_state(scenario, decoder)
    return float(schatten_norm(rho - np.outer(sigma, sigma.conj()), 1))


def message_error(scenario: DecodeScenario, decoder: DecoderChannel) -> float:
    """Probability of misreading the message after decoding.

    Measures the decoder's N output in the scenario's message basis and
    sums the probability mass landing off the true message.
    """
    _, _, out = _decoded_state(scenario, decoder)
    # out: (R, M, D, N, G); project N into the message basis
    amp = np.einsum("nj,rmdng->rmdjg", scenario.basis.conj(), out)
    w = np.einsum("rmdjg,rmdjg->mj", amp, amp.conj()).real
    return float(w.sum() - np.trace(w))
