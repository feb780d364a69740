"""Quantum channels in the Jamiolkowski representation, dephasing (Schur
product) channels, and classical channels.

A channel on dimension d is stored as its Jamiolkowski matrix

    jam[(i*d + k), (j*d + l)] = (1/d) <i| E(|k><l|) |j>,

i.e. the left bipartite factor indexes the output, the right one the input
copy, and the normalization makes jam a trace-1 state. Complete positivity
is jam >= 0; trace preservation is Tr_1(jam) = 1/d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    TOL_HERM,
    TOL_PSD,
    TOL_UNIT,
    assert_hermitian,
    complete_isometry,
    herm_eig,
    kron,
    partial_trace,
    reshuffle,
    schur,
)
from .sampling import Rng, haar_unitary

KRAUS_PRUNE_TOL = 1e-12


@dataclass(frozen=True)
class Channel:
    """A CPTP map: dimension, Jamiolkowski matrix, optional cached Kraus ops."""

    dim: int
    jam: np.ndarray
    kraus: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class DephasingChannelC:
    """Correlation matrix C of the channel rho -> rho o C (entrywise product)."""

    dim: int
    c: np.ndarray


def assert_correlation(c: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Check Hermitian + PSD + unit diagonal and return the complex array."""
    c = assert_hermitian(c, TOL_HERM)
    diag_dev = np.abs(np.diag(c) - 1.0).max()
    if diag_dev > tol:
        raise ValueError(f"diagonal entries deviate from 1 by {diag_dev:.3e}")
    w, _ = herm_eig(c)
    if w.min() < -tol:
        raise ValueError(f"not PSD: min eigenvalue {w.min():.3e}")
    return c


def dephasing_c(c: np.ndarray, tol: float = TOL_PSD) -> DephasingChannelC:
    """Validated correlation matrix wrapper for a dephasing channel."""
    c = assert_correlation(c, tol)
    return DephasingChannelC(dim=c.shape[0], c=c)


def assert_state(rho: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Check that rho is a density matrix (Hermitian, PSD, unit trace)."""
    rho = assert_hermitian(rho, TOL_HERM)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace is {tr}, not 1")
    w, _ = herm_eig(rho)
    if w.min() < -tol:
        raise ValueError(f"state not PSD: min eigenvalue {w.min():.3e}")
    return rho


def check_channel(ch: Channel, tol: float = TOL_PSD) -> None:
    """Raise unless ch satisfies the Channel invariants within tol."""
    d = ch.dim
    jam = assert_hermitian(ch.jam, TOL_HERM)
    if jam.shape != (d * d, d * d):
        raise ValueError(f"jam shape {jam.shape} does not match dim {d}")
    w, _ = herm_eig(jam)
    if w.min() < -tol:
        raise ValueError(f"not completely positive: min eigenvalue {w.min():.3e}")
    tp_dev = np.abs(partial_trace(jam, (d, d), 1) - np.eye(d) / d).max()
    if tp_dev > tol:
        raise ValueError(f"not trace preserving: deviation {tp_dev:.3e}")
    if ch.kraus is not None:
        comp = sum(k.conj().T @ k for k in ch.kraus)
        if np.abs(comp - np.eye(d)).max() > tol:
            raise ValueError("Kraus completeness violated")
        if np.abs(_jam_from_kraus(ch.kraus, d) - jam).max() > tol:
            raise ValueError("cached Kraus operators do not rebuild jam")


def _jam_from_kraus(ks: Sequence[np.ndarray], d: int) -> np.ndarray:
    jam = np.zeros((d * d, d * d), dtype=complex)
    for k in ks:
        v = np.asarray(k, dtype=complex).reshape(-1)
        jam += np.outer(v, v.conj())
    return jam / d


def from_kraus(ks: Sequence[np.ndarray], tol: float = TOL_PSD) -> Channel:
    """Channel from Kraus operators; raises on completeness violation."""
    ks = [np.asarray(k, dtype=complex) for k in ks]
    if not ks:
        raise ValueError("need at least one Kraus operator")
    d = ks[0].shape[0]
    if any(k.shape != (d, d) for k in ks):
        raise ValueError("Kraus operators must all be d x d")
    comp = sum(k.conj().T @ k for k in ks)
    dev = np.abs(comp - np.eye(d)).max()
    if dev > tol:
        raise ValueError(f"Kraus completeness violated by {dev:.3e}")
    return Channel(dim=d, jam=_jam_from_kraus(ks, d), kraus=tuple(ks))


def from_jam(jam: np.ndarray, tol: float = TOL_PSD) -> Channel:
    """Channel from its Jamiolkowski matrix; validates CPTP."""
    jam = np.asarray(jam, dtype=complex)
    d = int(round(np.sqrt(jam.shape[0])))
    ch = Channel(dim=d, jam=jam)
    check_channel(ch, tol)
    return ch


def to_kraus(ch: Channel, prune_tol: float = KRAUS_PRUNE_TOL) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of d * jam.

    Operators with eigenvalue below prune_tol are dropped; the list length
    is the numerical rank. The set is unique only up to the usual isometric
    freedom, so only the rebuilt channel should be compared.
    """
    if ch.kraus is not None:
        return [k.copy() for k in ch.kraus]
    d = ch.dim
    w, v = herm_eig(ch.dim * ch.jam)
    if w.min() < -d * TOL_PSD:
        raise ValueError(f"channel is not CP: eigenvalue {w.min():.3e}")
    ks = []
    for lam, vec in zip(w, v.T):
        if lam > prune_tol:
            ks.append(np.sqrt(lam) * vec.reshape(d, d))
    return ks


def apply(ch: Channel, rho: np.ndarray, via: str = "auto", tol: float = TOL_PSD) -> np.ndarray:
    """Apply the channel to a density matrix.

    via = "kraus" forces the Kraus sum, "jam" the contraction
    d * Tr_2[jam (1 (x) rho^T)]; "auto" uses cached Kraus when present.
    """
    d = ch.dim
    rho = assert_state(rho, tol)
    if rho.shape != (d, d):
        raise ValueError(f"state dim {rho.shape[0]} does not match channel dim {d}")
    if via == "auto":
        via = "kraus" if ch.kraus is not None else "jam"
    if via == "kraus":
        ks = to_kraus(ch)
        out = np.zeros((d, d), dtype=complex)
        for k in ks:
            out += k @ rho @ k.conj().T
        return out
    if via == "jam":
        return d * partial_trace(ch.jam @ kron(np.eye(d), rho.T), (d, d), 2)
    raise ValueError(f"unknown via={via!r}")


def superop_matrix(ch: Channel) -> np.ndarray:
    """Matrix Phi with Phi @ vec(rho) = vec(E(rho)) for row-major vec."""
    return ch.dim * reshuffle(ch.jam, ch.dim)


def compose(a: Channel, b: Channel) -> Channel:
    """Channel of a o b (apply b first), via the superoperator product."""
    if a.dim != b.dim:
        raise ValueError(f"dim mismatch: {a.dim} vs {b.dim}")
    d = a.dim
    phi = superop_matrix(a) @ superop_matrix(b)
    return Channel(dim=d, jam=reshuffle(phi, d) / d)


def stinespring(ch: Channel, complete: bool = False) -> np.ndarray:
    """Stinespring dilation isometry W = sum_e K_e (x) |e>_env.

    W has shape (d*r, d) with environment dimension r = Kraus rank and row
    index (i, e) -> i*r + e; Tr_env(W rho W^dag) reproduces the channel.
    With complete=True the isometry is extended to a (d*r) x (d*r) unitary U
    satisfying U (|phi> (x) |0>_env) = W |phi>.
    """
    d = ch.dim
    ks = to_kraus(ch)
    r = len(ks)
    w = np.stack(ks, axis=1).reshape(d * r, d)
    if not complete:
        return w
    pairs = []
    for j in range(d):
        e = np.zeros(d * r, dtype=complex)
        e[j * r] = 1.0
        pairs.append((e, w[:, j]))
    return complete_isometry(pairs, dim=d * r)


def identity_channel(d: int) -> Channel:
    """The identity channel on dimension d."""
    return from_kraus([np.eye(d, dtype=complex)])


def unitary_channel(u: np.ndarray, tol: float = TOL_UNIT) -> Channel:
    """The channel rho -> U rho U^dag."""
    u = np.asarray(u, dtype=complex)
    if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > tol:
        raise ValueError("matrix is not unitary")
    return from_kraus([u])


def completely_dephasing(d: int) -> Channel:
    """The channel that zeroes all off-diagonal entries (diagonal projection)."""
    ks = []
    for i in range(d):
        k = np.zeros((d, d), dtype=complex)
        k[i, i] = 1.0
        ks.append(k)
    return from_kraus(ks)


def dephasing_channel(dc: DephasingChannelC) -> Channel:
    """Channel rho -> rho o C with Jamiolkowski entries J[(ii),(jj)] = C_ij / d."""
    d = dc.dim
    jam = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            jam[i * d + i, j * d + j] = dc.c[i, j] / d
    return Channel(dim=d, jam=jam, kraus=tuple(dephasing_kraus(dc)))


def dephasing_kraus(dc: DephasingChannelC, prune_tol: float = KRAUS_PRUNE_TOL) -> list[np.ndarray]:
    """Diagonal Kraus operators K_k = diag over i of the k-th component of the
    Gram vectors of C; operators with negligible norm are pruned."""
    from .linalg import gram_vectors

    d = dc.dim
    psi = gram_vectors(dc.c)  # row i is the vector realizing C_ij = <psi_j|psi_i>
    ks = []
    for k in range(d):
        diag = psi[:, k]
        if np.abs(diag).max() > prune_tol:
            ks.append(np.diag(diag))
    return ks


def complementary_dephasing(dc: DephasingChannelC) -> Channel:
    """The measure-and-prepare complement rho -> sum_i rho_ii |psi_i><psi_i|."""
    from .linalg import gram_vectors

    d = dc.dim
    psi = gram_vectors(dc.c)
    ks = []
    for i in range(d):
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        ks.append(np.outer(psi[i], e))
    return from_kraus(ks)


def assert_stochastic(t: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Check a column-stochastic matrix: entries >= 0, columns summing to 1."""
    t = np.asarray(t)
    if np.abs(np.asarray(t, dtype=complex).imag).max() > tol:
        raise ValueError("transition matrix must be real")
    t = np.real(np.asarray(t, dtype=complex))
    if t.min() < -tol:
        raise ValueError(f"negative transition probability {t.min():.3e}")
    col_dev = np.abs(t.sum(axis=0) - 1.0).max()
    if col_dev > tol:
        raise ValueError(f"columns do not sum to 1 (deviation {col_dev:.3e})")
    return t


def classical_channel(t: np.ndarray, tol: float = TOL_PSD) -> Channel:
    """Channel sum_ij T_ij <j|.|j> |i><i| with column-stochastic T; diagonal jam."""
    t = assert_stochastic(t, tol)
    d = t.shape[0]
    jam = np.diag(t.reshape(-1).astype(complex) / d)
    return Channel(dim=d, jam=jam)


def transition_matrix(ch: Channel) -> np.ndarray:
    """T_ij = <i| E(|j><j|) |i> = d * jam[(ij),(ij)]; column-stochastic."""
    d = ch.dim
    return (d * np.diag(ch.jam).real).reshape(d, d)


def classical_version(ch: Channel) -> Channel:
    """Diagonal projection of the channel (dephase input and output).

    Equal to classical_channel(transition_matrix(ch)); implemented by zeroing
    the off-diagonal of jam directly so the operation is exactly idempotent.
    """
    return Channel(dim=ch.dim, jam=np.diag(np.diag(ch.jam)))


def random_dephasing(rng: Rng, d: int) -> DephasingChannelC:
    """Random correlation matrix: the Gram matrix of d Haar-random unit vectors."""
    from .sampling import haar_vector

    vs = np.stack([haar_vector(rng.derive(i), d) for i in range(d)], axis=1)
    return dephasing_c(vs.conj().T @ vs)


def random_channel(rng: Rng, d: int, rank: int) -> Channel:
    """Haar-random channel of the given Kraus rank (isometry d -> d * rank)."""
    if not 1 <= rank <= d * d:
        raise ValueError(f"rank must be in [1, {d * d}], got {rank}")
    u = haar_unitary(rng, d * rank)
    v = u[:, :d]
    ks = [v.reshape(d, rank, d)[:, e, :] for e in range(rank)]
    return from_kraus(ks)
