"""Dense complex linear algebra on tensor-product spaces.

Matrices are plain ``numpy`` complex arrays; a tensor factorization is a
tuple of local dimensions (``dims``) whose product is the matrix size.
Factor indices are 0-based throughout.
"""

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .config import TOL
from .errors import DimensionError, ValidationError

__all__ = [
    "as_matrix",
    "check_dims",
    "kron",
    "partial_trace",
    "is_hermitian",
    "hermitian_eig",
    "trace_norm",
    "flip_operator",
    "mc_tensor_positive",
    "TensorPositivity",
    "make_rng",
    "haar_unitary",
    "random_pure_state",
    "wishart",
    "matrix_to_json",
    "matrix_from_json",
]


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def check_dims(n: int, dims: Sequence[int]) -> tuple:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"invalid factor dimensions {dims}")
    if int(np.prod(dims, dtype=np.int64)) != n:
        raise DimensionError(f"dims {dims} multiply to {int(np.prod(dims))}, matrix has dimension {n}")
    return dims


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor outermost."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def partial_trace(w, dims: Sequence[int], keep) -> np.ndarray:
    """Reduce ``w`` onto the factors listed in ``keep`` (returned in increasing order)."""
    w = as_matrix(w)
    if w.shape[0] != w.shape[1]:
        raise DimensionError(f"partial trace needs a square matrix, got {w.shape}")
    dims = check_dims(w.shape[0], dims)
    keep = sorted({int(k) for k in keep})
    if not keep:
        raise ValidationError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"keep {keep} out of range for dims {dims}")
    m = len(dims)
    t = w.reshape(dims + dims)
    traced = [k for k in range(m) if k not in keep]
    # einsum labels: row i_k, column j_k; traced factors share the row label
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(m)]
    cols = [rows[k] if k in traced else next(letters) for k in range(m)]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    r = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    kd = int(np.prod([dims[k] for k in keep]))
    return r.reshape(kd, kd)


def is_hermitian(a, tol: float = TOL.hermitian) -> bool:
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def hermitian_eig(a, tol: float = TOL.hermitian):
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix.

    Uses cyclic Jacobi rotations (compiled when available).
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {a.shape}")
    if not is_hermitian(a, tol):
        dev = float(np.max(np.abs(a - a.conj().T)))
        raise ValidationError(f"matrix is not Hermitian (max |A - A^H| = {dev:.3e})")
    h = 0.5 * (a + a.conj().T)
    ar = np.ascontiguousarray(h.real, dtype=np.float64)
    ai = np.ascontiguousarray(h.imag, dtype=np.float64)
    w, vr, vi, _ = kernels.jacobi_eigh(ar, ai, TOL.jacobi, TOL.jacobi_max_sweeps)
    w = np.asarray(w)
    v = np.asarray(vr) + 1j * np.asarray(vi)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def trace_norm(a) -> float:
    w, _ = hermitian_eig(a)
    return float(np.sum(np.abs(w)))


def flip_operator(d: int) -> np.ndarray:
    """Swap operator on C^d (x) C^d: V(x (x) y) = y (x) x."""
    v = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            v[j * d + i, i * d + j] = 1.0
    return v


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def wishart(rng: np.random.Generator, d: int, size=None) -> np.ndarray:
    """Random positive operator(s) G G^H with complex Gaussian G."""
    shape = (d, d) if size is None else (size, d, d)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return g @ np.conj(np.swapaxes(g, -1, -2))


class TensorPositivity(NamedTuple):
    verdict: str  # "no-violation-found" or "violated"
    worst: float  # smallest tr[W (X_1 x ... x X_m)] seen
    worst_scaled: float  # smallest value divided by prod ||X_j|| * ||W||_1
    samples: int

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"


def mc_tensor_positive(w, dims, samples: int, seed: int, batch: int = 512) -> TensorPositivity:
    """Monte-Carlo search for a product of positive operators with tr[W (X_1 x ... x X_m)] < 0.

    One-sided: ``no-violation-found`` never certifies tensor positivity.
    """
    w = as_matrix(w)
    dims = check_dims(w.shape[0], dims)
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    if not is_hermitian(w):
        raise ValidationError("tensor-positivity test needs a Hermitian operator")
    m = len(dims)
    wnorm = trace_norm(w)
    t = w.reshape(dims + dims)
    rows = "abcdefghij"[:m]
    cols = "klmnopqrst"[:m]
    spec = rows + cols + "," + ",".join(f"z{cols[k]}{rows[k]}" for k in range(m)) + "->z"
    rng = make_rng(seed)
    worst = np.inf
    worst_scaled = np.inf
    violated = False
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        xs = [wishart(rng, d, size=b) for d in dims]
        vals = np.real(np.einsum(spec, t, *xs, optimize=True))
        norms = np.prod([np.linalg.norm(x, ord=2, axis=(1, 2)) for x in xs], axis=0)
        scale = norms * max(wnorm, np.finfo(float).tiny)
        scaled = vals / scale
        worst = min(worst, float(vals.min()))
        worst_scaled = min(worst_scaled, float(scaled.min()))
        if np.any(vals < -TOL.tensor_positive * scale):
            violated = True
        done += b
    return TensorPositivity("violated" if violated else "no-violation-found", worst, worst_scaled, samples)


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ValidationError(f"matrix entries do not match rows*cols = {rows}*{cols}")
    return (re + 1j * im).reshape(rows, cols)
