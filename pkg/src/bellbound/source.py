"""Source operators for pure N-qudit states and their covering-norm estimate.

The collapsed site (one setting) carries the state's "phi" vectors; every
other site n is replicated ``S_n`` times and carries permutation-invariant
blocks W_{j j1} on (C^d)^{(x) S_n}.  Site order inside a source operator is
``order``: the collapsed site first, then the remaining sites in their
original order.
"""

from dataclasses import dataclass
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np

from .config import SOURCE_DIM_CAP, TOL
from .errors import BudgetError, DimensionError, ValidationError
from .tensor import is_hermitian, kron, make_rng, partial_trace

__all__ = [
    "PureStateDecomposition",
    "SourceOperator",
    "CoveringEstimate",
    "decompose",
    "w_block",
    "build_source_operator",
    "partial_trace_error",
    "verify_dilation",
    "covering_estimate",
    "pair_sum_bruteforce",
    "ghz_state",
    "source_report",
]

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def ghz_state(d: int, N: int) -> np.ndarray:
    """(1/sqrt d) sum_m |m>^(x)N in the computational basis."""
    psi = np.zeros(d**N, dtype=complex)
    step = sum(d**k for k in range(N))
    psi[[m * step for m in range(d)]] = 1.0 / np.sqrt(d)
    return psi


def _infer_parties(length: int, d: int) -> int:
    N = int(round(np.log(length) / np.log(d)))
    if d**N != length:
        raise DimensionError(f"state of length {length} is not a power of d = {d}")
    return N


@dataclass(frozen=True, eq=False)
class PureStateDecomposition:
    d: int
    N: int
    order: tuple  # original site index at each position; order[0] is the pivot
    bases: tuple  # basis matrices (columns e_m) per position
    coeffs: np.ndarray  # coefficients in the bases, shape (d,)*N, pivot axis first
    beta: np.ndarray  # shape (d,)*(N-1)
    phi: np.ndarray  # shape (d,)*(N-1) + (d,); zero rows where beta == 0

    @property
    def pivot_site(self) -> int:
        return self.order[0]

    def amplitudes(self) -> np.ndarray:
        """beta_J phi_J with the collapsed-site coordinate first: shape (d,)*N."""
        a = self.beta[..., None] * self.phi
        return np.moveaxis(a, -1, 0)

    def reassemble(self) -> np.ndarray:
        """State vector rebuilt from beta, phi and the bases, in permuted site order."""
        t = self.amplitudes()
        for pos in range(1, self.N):
            t = np.moveaxis(np.tensordot(self.bases[pos], t, axes=([1], [pos])), 0, pos)
        return t.ravel()


def _check_basis(b, d: int):
    b = np.asarray(b, dtype=complex)
    if b.shape != (d, d):
        raise DimensionError(f"basis must be {d}x{d}, got {b.shape}")
    if np.max(np.abs(b.conj().T @ b - np.eye(d))) > TOL.structural:
        raise ValidationError("basis vectors are not orthonormal")
    return b


def decompose(psi, d: int, bases: Sequence = None, pivot_site: int = 0) -> PureStateDecomposition:
    """Split a pure state into beta weights and normalized pivot-site vectors phi."""
    psi = np.asarray(psi, dtype=complex).ravel()
    N = _infer_parties(psi.size, d)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValidationError(f"state is not normalized (norm {np.linalg.norm(psi):.15f})")
    if not 0 <= pivot_site < N:
        raise ValidationError(f"pivot site {pivot_site} out of range for N = {N}")
    bases = [np.eye(d, dtype=complex)] * N if bases is None else [_check_basis(b, d) for b in bases]
    if len(bases) != N:
        raise DimensionError(f"{len(bases)} bases for {N} sites")
    order = (pivot_site,) + tuple(n for n in range(N) if n != pivot_site)
    t = psi.reshape((d,) * N)
    for n in range(N):
        t = np.moveaxis(np.tensordot(bases[n].conj().T, t, axes=([1], [n])), 0, n)
    coeffs = np.transpose(t, order)
    pb = tuple(bases[n] for n in order)
    beta = np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=0))
    phi = np.zeros(beta.shape + (d,), dtype=complex)
    nz = beta > 0
    vecs = np.moveaxis(np.tensordot(pb[0], coeffs, axes=([1], [0])), 0, -1)
    phi[nz] = vecs[nz] / beta[nz][:, None]
    dec = PureStateDecomposition(d, N, order, pb, coeffs, beta, phi)
    if abs(np.sum(beta**2) - 1.0) > 1e-12:
        raise ValidationError("beta weights are not normalized")
    ref = np.transpose(psi.reshape((d,) * N), order).ravel()
    if np.max(np.abs(dec.reassemble() - ref)) > 1e-12:
        raise RuntimeError("decomposition does not reproduce the state")
    return dec


def w_block(e_j, e_j1, s: int) -> np.ndarray:
    """Permutation-invariant block on (C^d)^(x)s whose one-copy marginal is |e_j><e_j1|.

    Diagonal blocks are (|e_j><e_j|)^(x)s; off-diagonal ones use the four-term
    polarization sum with a 1/2^s factor on each term and an overall 1/2.
    """
    if s < 1:
        raise ValidationError("copies s must be >= 1")
    a = np.asarray(e_j, dtype=complex).ravel()
    b = np.asarray(e_j1, dtype=complex).ravel()
    if a.shape != b.shape:
        raise DimensionError("basis vectors have different lengths")
    if abs(np.linalg.norm(a) - 1.0) > TOL.structural or abs(np.linalg.norm(b) - 1.0) > TOL.structural:
        raise ValidationError("w_block needs unit vectors")
    if np.max(np.abs(a - b)) <= TOL.structural:
        p = np.outer(a, a.conj())
        return kron(*([p] * s))
    if abs(np.vdot(a, b)) > TOL.structural:
        raise ValidationError("w_block needs orthogonal (or equal) vectors")
    out = 0
    for k in range(4):
        ph = 1j**k
        v = a + ph * b
        out = out + ph * kron(*([np.outer(v, v.conj())] * s))
    return out / 2.0 ** (s + 1)


class SourceOperator(NamedTuple):
    collapsed_site: int
    order: tuple
    settings: tuple  # copies per position, settings[0] == 1
    operator: np.ndarray
    beta: np.ndarray
    d: int

    @property
    def factor_dims(self) -> tuple:
        return (self.d,) * int(sum(self.settings))

    def slot(self, position: int, copy: int) -> int:
        """Tensor-factor index of ``copy`` at site ``position`` (permuted order)."""
        return int(sum(self.settings[:position])) + copy


def build_source_operator(dec: PureStateDecomposition, settings: Sequence[int], cap: int = SOURCE_DIM_CAP) -> SourceOperator:
    """Dense T = sum beta beta1 |phi><phi1| (x) W^(2) (x) ... (x) W^(N).

    ``settings`` lists S_n for the non-collapsed sites, in permuted order.
    """
    d, N = dec.d, dec.N
    settings = tuple(int(s) for s in settings)
    if len(settings) != N - 1:
        raise DimensionError(f"need {N - 1} settings for the non-collapsed sites, got {len(settings)}")
    if any(s < 1 for s in settings):
        raise ValidationError("all settings must be >= 1")
    dim = d ** (1 + sum(settings))
    if dim > cap:
        raise BudgetError(f"source operator dimension {dim} exceeds cap {cap}", dim, cap)
    amp = dec.amplitudes()
    blocks = []
    for pos, s in enumerate(settings, start=1):
        e = dec.bases[pos]
        w = np.empty((d, d, d**s, d**s), dtype=complex)
        for j in range(d):
            for j1 in range(d):
                w[j, j1] = w_block(e[:, j], e[:, j1], s)
        blocks.append(w)
    it = iter(_LETTERS)
    a, b = next(it), next(it)
    ket = [next(it) for _ in range(N - 1)]
    bra = [next(it) for _ in range(N - 1)]
    rows = [next(it) for _ in range(N - 1)]
    cols = [next(it) for _ in range(N - 1)]
    spec = a + "".join(ket) + "," + b + "".join(bra)
    spec += "".join("," + ket[k] + bra[k] + rows[k] + cols[k] for k in range(N - 1))
    spec += "->" + a + "".join(rows) + b + "".join(cols)
    t = np.einsum(spec, amp, amp.conj(), *blocks, optimize=True).reshape(dim, dim)
    if not is_hermitian(t):
        raise RuntimeError("source operator is not Hermitian")
    if abs(np.trace(t) - 1.0) > TOL.structural:
        raise RuntimeError(f"source operator trace {np.trace(t)} != 1")
    return SourceOperator(dec.pivot_site, dec.order, (1,) + settings, t, dec.beta, d)


def partial_trace_error(t: SourceOperator, psi) -> float:
    """max |tr_extra-copies[T] - |psi><psi||, with psi in original site order."""
    psi = np.asarray(psi, dtype=complex).ravel()
    N = len(t.order)
    ref = np.transpose(psi.reshape((t.d,) * N), t.order).ravel()
    keep = [t.slot(pos, 0) for pos in range(N)]
    red = partial_trace(t.operator, t.factor_dims, keep)
    return float(np.max(np.abs(red - np.outer(ref, ref.conj()))))


def verify_dilation(t: SourceOperator, psi, trials: int, seed: int) -> float:
    """Max deviation between tr[T (X's at random copy slots)] and tr[rho (X_1 x ... x X_N)]."""
    psi = np.asarray(psi, dtype=complex).ravel()
    N = len(t.order)
    d = t.d
    rho = np.outer(psi, psi.conj())
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        xs = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(N)]
        copies = [int(rng.integers(s)) for s in t.settings]
        keep = [t.slot(pos, copies[pos]) for pos in range(N)]
        red = partial_trace(t.operator, t.factor_dims, keep)
        lhs = np.trace(red @ kron(*(xs[n] for n in t.order)))
        rhs = np.trace(rho @ kron(*xs))
        worst = max(worst, float(abs(lhs - rhs)))
    return worst


class CoveringEstimate(NamedTuple):
    estimate: float
    theorem_bound: float


def _check_beta(beta, d: int, N: int) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.size != d ** (N - 1):
        raise DimensionError(f"beta table has {beta.size} entries, need d^(N-1) = {d ** (N - 1)}")
    beta = beta.reshape((d,) * (N - 1))
    if beta.min() < 0:
        raise ValidationError("beta weights must be non-negative")
    if abs(np.sum(beta**2) - 1.0) > TOL.structural:
        raise ValidationError(f"beta weights are not normalized (sum of squares {np.sum(beta**2):.12f})")
    return beta


def covering_estimate(beta, d: int, N: int) -> CoveringEstimate:
    """Pair sum over index tuples of beta beta1 * 2^(#differing positions), and (2d-1)^(N-1)."""
    if d < 2 or N < 2:
        raise ValidationError("need d >= 2 and N >= 2")
    beta = _check_beta(beta, d, N)
    kernel = 2.0 * np.ones((d, d)) - np.eye(d)
    x = beta
    for axis in range(N - 1):
        x = np.moveaxis(np.tensordot(kernel, x, axes=([1], [axis])), 0, axis)
    est = float(np.sum(beta * x))
    bound = float((2 * d - 1) ** (N - 1))
    if est > bound + 1e-9:
        raise RuntimeError(f"covering estimate {est} exceeds (2d-1)^(N-1) = {bound}")
    return CoveringEstimate(est, bound)


def pair_sum_bruteforce(beta, d: int, N: int) -> float:
    """Direct double loop over index tuples; reference for ``covering_estimate``."""
    beta = np.asarray(beta, dtype=float).reshape((d,) * (N - 1))
    total = 0.0
    idx = list(product(range(d), repeat=N - 1))
    for J in idx:
        for J1 in idx:
            diff = sum(1 for x, y in zip(J, J1) if x != y)
            total += beta[J] * beta[J1] * 2**diff
    return total


def source_report(psi, d: int, settings: Sequence[int], pivot_site: int = 0, trials: int = 20, seed: int = 0) -> dict:
    dec = decompose(psi, d, pivot_site=pivot_site)
    t = build_source_operator(dec, settings)
    est = covering_estimate(dec.beta, d, dec.N)
    return {
        "d": d,
        "N": dec.N,
        "pivot_site": pivot_site,
        "settings": list(t.settings),
        "site_order": list(t.order),
        "estimate": est.estimate,
        "theorem_bound": est.theorem_bound,
        "trace": float(np.real(np.trace(t.operator))),
        "partial_trace_error": partial_trace_error(t, psi),
        "dilation_error": verify_dilation(t, psi, trials, seed),
    }
