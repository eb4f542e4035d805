"""A key-distribution counterexample built on locking.

A protocol hands Alice and Bob a uniform n-bit secret; Alice splits it
into a sub-key of k_bits and a remainder, and transmits the remainder
locked by a unitary selected from a public codebook by the sub-key.  An
eavesdropper's measured correlation with the secret stays small while the
legitimate parties, who hold the sub-key, recover the remainder exactly.
This separates trace-distance security from accessible-information
security: the former composes badly once part of the key is spent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import _eta, alicki_fannes_bound
from .haar import RngSpec, haar_batch
from .locking import LockingScheme, optimize_distinguishability
from .measure import BudgetExceededError

DEMO_BUDGET = 64  # largest 2^{n - k_bits} the demo will construct


@dataclass(frozen=True)
class ProtocolRun:
    """One demo execution: codebook, sampled secret, and the statistics."""

    n: int
    k_bits: int
    trials: int
    codebook: np.ndarray  # (2^k_bits, d, d) public unitaries
    secrets: np.ndarray  # (trials, 2) integer pairs (sub-key, remainder)
    with_key_recovery_rate: float
    with_key_correlation: float
    without_key_correlation: float
    optimizer_restarts: int


def qkd_security_bounds(eps: float, n: int) -> tuple[float, float]:
    """(trace_bound, iacc_bound): what locking costs the composed protocol.

    The post-execution state is within 2 eps of ideal in trace distance,
    yet the correlation with the revealed remainder is only bounded by
    8 eps n + 2 eta(1 - 2 eps) + 2 eta(2 eps) bits, which is vacuous long
    before the trace bound is.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be a positive integer")
    trace_bound = 2.0 * eps
    iacc_bound = 8.0 * eps * n + 2.0 * _eta(1.0 - 2.0 * eps) + 2.0 * _eta(2.0 * eps)
    return trace_bound, iacc_bound


def run_protocol_demo(n: int, k_bits: int, trials: int, rng: RngSpec,
                      restarts: int = 8) -> ProtocolRun:
    """Execute the counterexample protocol and report both sides of the split.

    With the sub-key, the remainder is recovered exactly by applying the
    inverse codebook unitary and reading the computational basis.  Without
    it, the reported correlation is the optimized distinguishability of
    the cyphertext ensemble (messages = remainder values, key = sub-key),
    a lower bound on what any measurement achieves.
    """
    if n < 1 or k_bits < 1:
        raise ValueError("n and k_bits must be positive")
    if k_bits >= n:
        raise ValueError("the sub-key must be shorter than the secret")
    d = 2 ** (n - k_bits)
    if d > DEMO_BUDGET:
        raise BudgetExceededError(d, DEMO_BUDGET)
    k_count = 2 ** k_bits
    gen = rng.generator()
    codebook = haar_batch(d, k_count, gen)

    # with-key pass: invert the codebook unitary and measure
    secrets = np.stack([gen.integers(0, k_count, size=trials),
                        gen.integers(0, d, size=trials)], axis=1)
    hits = 0
    corr = 0.0
    for sk, sc in secrets:
        cipher = codebook[sk][:, sc]
        probs = np.abs(codebook[sk].conj().T @ cipher) ** 2
        guess = int(np.argmax(probs))
        hits += guess == sc
        # l1 correlation of the (remainder, outcome) joint vs product,
        # averaged over the uniform remainder for this sub-key
        joint = np.abs(codebook[sk].conj().T @ codebook[sk]) ** 2 / d
        corr += np.abs(joint - np.outer(joint.sum(1), joint.sum(0))).sum()
    with_key_rate = hits / trials
    with_key_corr = corr / trials

    # without-key pass: the eavesdropper faces the sub-key-averaged ensemble
    scheme = _eavesdropper_scheme(codebook, d, k_count)
    report = optimize_distinguishability(scheme, "projective_gradient",
                                         restarts, rng.stream(rng.stream_index + 1))
    return ProtocolRun(n=n, k_bits=k_bits, trials=trials, codebook=codebook,
                       secrets=secrets,
                       with_key_recovery_rate=float(with_key_rate),
                       with_key_correlation=float(with_key_corr),
                       without_key_correlation=float(report.best_value),
                       optimizer_restarts=restarts)


def _eavesdropper_scheme(codebook: np.ndarray, d: int, k_count: int) -> LockingScheme:
    """Cast the codebook protocol as a locking scheme on C = d, K = k_count.

    Message m = (remainder, sub-key) pairs, uniformly distributed; the
    block-diagonal encoding applies codebook[k] when the key register
    holds k, so the eavesdropper's conditional cyphertext states are the
    sub-key-averaged pure-state ensembles.
    """
    m = d * k_count
    u = np.zeros((m, m), dtype=complex)
    for k in range(k_count):
        # input ordering (C, K): entry (c, k) sits at c * k_count + k
        idx = np.arange(d) * k_count + k
        u[np.ix_(idx, idx)] = codebook[k]
    return LockingScheme(dims=(d, k_count, 1), p=np.full(m, 1.0 / m),
                         message_basis=np.eye(m, dtype=complex),
                         unitary=u, schmidt=np.ones(1))


def correlation_gap(run: ProtocolRun) -> float:
    """How far the eavesdropper's best correlation sits below the keyed one."""
    return run.with_key_correlation - run.without_key_correlation


def remainder_info_cap(run: ProtocolRun, eps: float) -> float:
    """Accessible-information cap on the remainder given a locking level eps."""
    return alicki_fannes_bound(eps, 2 ** (run.n - run.k_bits))
