"""Quantum realizations of Bell scenarios and the see-saw search.

POVMs are stored per site and per setting as a stacked array of shape
``(outcomes, D, D)`` where ``D`` is the local Hilbert-space dimension.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_SEED, TOL
from .errors import DimensionError, ValidationError
from .scenario import Behavior, BellFunctional, BellScenario, LhvConstants, bell_value, lhv_constants
from .tensor import (
    as_matrix,
    haar_unitary,
    hermitian_eig,
    is_hermitian,
    make_rng,
    matrix_from_json,
    matrix_to_json,
)

__all__ = [
    "QuantumModel",
    "ViolationReport",
    "SeesawConfig",
    "quantum_behavior",
    "bell_operator",
    "seesaw",
    "violation_ratio",
    "quantum_envelope",
    "grid_oracle_chsh",
    "chsh_singlet_value",
    "singlet",
    "qubit_observable_povm",
    "model_to_json",
    "model_from_json",
]

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _labels(N: int):
    # per site: outcome, row, column letters
    it = iter(_LETTERS)
    return [next(it) for _ in range(N)], [next(it) for _ in range(N)], [next(it) for _ in range(N)]


def _check_povm(stack, D: int, projective: bool):
    if stack.ndim != 3 or stack.shape[1:] != (D, D):
        raise DimensionError(f"POVM elements must be {D}x{D}, got stack of shape {stack.shape}")
    total = stack.sum(axis=0)
    if np.max(np.abs(total - np.eye(D))) > TOL.structural:
        raise ValidationError("POVM elements do not sum to the identity")
    for k, m in enumerate(stack):
        if not is_hermitian(m):
            raise ValidationError(f"POVM element {k} is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -TOL.structural:
            raise ValidationError(f"POVM element {k} is not positive semidefinite")
        if projective and np.max(np.abs(m @ m - m)) > TOL.spectral:
            raise ValidationError(f"POVM element {k} is not a projector")
    if projective:
        for a in range(len(stack)):
            for b in range(a + 1, len(stack)):
                if np.max(np.abs(stack[a] @ stack[b])) > TOL.spectral:
                    raise ValidationError(f"projectors {a} and {b} are not orthogonal")


@dataclass(frozen=True, eq=False)
class QuantumModel:
    """A density operator on the tensor product plus POVMs for every site and setting."""

    dims: tuple
    state: np.ndarray
    povms: tuple  # povms[n][s] -> array (outcomes, D_n, D_n)
    projective: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        rho = as_matrix(self.state)
        D = int(np.prod(dims))
        if rho.shape != (D, D):
            raise DimensionError(f"state is {rho.shape}, dims {dims} need {D}x{D}")
        if not is_hermitian(rho):
            raise ValidationError("state is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TOL.structural:
            raise ValidationError(f"state trace is {np.trace(rho).real:.12f}, not 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -TOL.structural:
            raise ValidationError("state is not positive semidefinite")
        if len(self.povms) != len(dims):
            raise DimensionError(f"{len(self.povms)} POVM sites for {len(dims)} parties")
        povms = []
        for n, site in enumerate(self.povms):
            stacks = []
            for s in site:
                st = np.asarray(s, dtype=complex)
                _check_povm(st, dims[n], self.projective)
                stacks.append(st)
            if not stacks:
                raise ValidationError(f"site {n} has no measurements")
            povms.append(tuple(stacks))
        object.__setattr__(self, "state", rho)
        object.__setattr__(self, "povms", tuple(povms))

    @property
    def settings(self) -> tuple:
        return tuple(len(site) for site in self.povms)

    @property
    def outcomes(self) -> tuple:
        return tuple(site[0].shape[0] for site in self.povms)

    def scenario(self) -> BellScenario:
        return BellScenario(self.settings, self.outcomes)


class ViolationReport(NamedTuple):
    quantum_value: float
    lhv_norm: float
    ratio: float
    model: QuantumModel
    iterations: int
    converged: bool
    restart: int = 0
    history: tuple = ()


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 32
    max_iters: int = 500
    tol: float = 1e-9
    seed: int = DEFAULT_SEED
    projective: bool = False  # True: rank-1 projectors, needs Hilbert dims == outcome counts
    threads: int = field(default_factory=lambda: int(os.environ.get("BELLBOUND_THREADS", "1")))


def _check_scenario(scenario: BellScenario, settings, outcomes):
    if tuple(settings) != scenario.settings or tuple(outcomes) != scenario.outcomes:
        raise DimensionError(
            f"measurements give settings {tuple(settings)} / outcomes {tuple(outcomes)}, "
            f"scenario has {scenario.settings} / {scenario.outcomes}"
        )


def quantum_behavior(m: QuantumModel, scenario: BellScenario = None) -> Behavior:
    """Joint distributions tr[rho (M_1 x ... x M_N)] for every joint setting."""
    scenario = m.scenario() if scenario is None else scenario
    _check_scenario(scenario, m.settings, m.outcomes)
    N = scenario.parties
    lam, row, col = _labels(N)
    rho = m.state.reshape(m.dims + m.dims)
    spec = "".join(row) + "".join(col) + "," + ",".join(lam[n] + col[n] + row[n] for n in range(N))
    spec += "->" + "".join(lam)
    p = np.zeros(scenario.shape)
    for s in scenario.joint_settings():
        ops = [m.povms[n][s[n]] for n in range(N)]
        p[s] = np.real(np.einsum(spec, rho, *ops, optimize=True))
    return Behavior(scenario, p)


def bell_operator(f: BellFunctional, povms) -> np.ndarray:
    """B = sum_s sum_l f_s(l) M_1,s1(l1) x ... x M_N,sN(lN), so that tr[rho B] is the Bell value."""
    sc = f.scenario
    N = sc.parties
    povms = [[np.asarray(x, dtype=complex) for x in site] for site in povms]
    _check_scenario(sc, [len(site) for site in povms], [site[0].shape[0] for site in povms])
    dims = [site[0].shape[1] for site in povms]
    for n, site in enumerate(povms):
        for st in site:
            if st.shape != (sc.outcomes[n], dims[n], dims[n]):
                raise DimensionError(f"site {n}: POVM stack shape {st.shape} inconsistent")
    lam, row, col = _labels(N)
    spec = "".join(lam) + "," + ",".join(lam[n] + row[n] + col[n] for n in range(N))
    spec += "->" + "".join(row) + "".join(col)
    D = int(np.prod(dims))
    b = np.zeros((D, D), dtype=complex)
    for s in sc.joint_settings():
        fs = f.coeffs[s]
        if not np.any(fs):
            continue
        b += np.einsum(spec, fs, *(povms[n][s[n]] for n in range(N)), optimize=True).reshape(D, D)
    return 0.5 * (b + b.conj().T)


def violation_ratio(f: BellFunctional, m: QuantumModel) -> float:
    """|Bell value of the model| / LHV norm of the functional."""
    norm = lhv_constants(f).lhv_norm
    if norm <= 0.0:
        raise ValidationError("degenerate functional: LHV norm is 0")
    return abs(bell_value(f, quantum_behavior(m, f.scenario))) / norm


def quantum_envelope(f, upsilon: float):
    """Range of a quantum Bell value allowed by a violation parameter ``upsilon``.

    ``f`` is a BellFunctional, LhvConstants, or a ``(sup, inf)`` pair.
    """
    if not upsilon >= 1.0:
        raise ValidationError(f"violation parameter must be >= 1, got {upsilon}")
    if isinstance(f, BellFunctional):
        c = lhv_constants(f)
        sup, inf = c.sup, c.inf
    elif isinstance(f, LhvConstants):
        sup, inf = f.sup, f.inf
    else:
        sup, inf = (float(x) for x in f)
    if inf > sup:
        raise ValidationError(f"inf {inf} exceeds sup {sup}")
    spread = 0.5 * (upsilon - 1.0) * (sup - inf)
    return float(inf - spread), float(sup + spread)


# -- see-saw ---------------------------------------------------------------


def _projector(vectors) -> np.ndarray:
    return vectors @ vectors.conj().T


def _local_value(stack, g) -> float:
    return float(np.real(np.einsum("kij,kji->", stack, g)))


class _Seesaw:
    def __init__(self, f: BellFunctional, dims, cfg: SeesawConfig):
        self.f = f
        self.sc = f.scenario
        self.N = self.sc.parties
        self.dims = tuple(dims)
        self.cfg = cfg
        lam, row, col = _labels(self.N)
        self._env_specs = []
        for n in range(self.N):
            ins = ["".join(lam)]
            ins += [lam[m] + row[m] + col[m] for m in range(self.N) if m != n]
            ins += ["".join(row), "".join(col)]
            out = lam[n] + col[n] + row[n]
            self._env_specs.append(",".join(ins) + "->" + out)

    def init_povms(self, rng):
        povms = []
        for n in range(self.N):
            D, d = self.dims[n], self.sc.outcomes[n]
            site = []
            for _ in range(self.sc.settings[n]):
                u = haar_unitary(rng, D)
                stack = np.zeros((d, D, D), dtype=complex)
                for k in range(D):
                    stack[k % d] += _projector(u[:, k : k + 1])
                site.append(stack)
            povms.append(site)
        return povms

    def environment(self, psi, povms, n, s):
        """G(l) with value = sum_l tr[M_{n,s}(l) G(l)] + terms not involving M_{n,s}."""
        D = self.dims[n]
        g = np.zeros((self.sc.outcomes[n], D, D), dtype=complex)
        pt = psi.reshape(self.dims)
        spec = self._env_specs[n]
        for js in self.sc.joint_settings():
            if js[n] != s:
                continue
            fs = self.f.coeffs[js]
            if not np.any(fs):
                continue
            ops = [povms[m][js[m]] for m in range(self.N) if m != n]
            g += np.einsum(spec, fs, *ops, pt.conj(), pt, optimize=True)
        return 0.5 * (g + np.conj(np.swapaxes(g, 1, 2)))

    def best_two_outcome(self, diff, rank_one):
        w, v = hermitian_eig(diff)
        if rank_one:
            return _projector(v[:, :1])
        return _projector(v[:, w > 0])

    def update_measurement(self, g, current, rank_one):
        d, D = g.shape[0], g.shape[1]
        eye = np.eye(D)
        if d == 2:
            m0 = self.best_two_outcome(g[0] - g[1], rank_one)
            cand = np.stack([m0, eye - m0])
            return cand if _local_value(cand, g) >= _local_value(current, g) else current
        best, best_val = current, _local_value(current, g)
        refs = [g[k] for k in range(d)] + [sum(k * current[k] for k in range(d))]
        for ref in refs:
            _, v = hermitian_eig(0.5 * (ref + ref.conj().T))
            score = np.real(np.einsum("ik,lij,jk->kl", v.conj(), g, v))  # (vector, outcome)
            cand = np.zeros_like(current)
            if rank_one:
                rows, cols = linear_sum_assignment(-score)
                for r, c in zip(rows, cols):
                    cand[c] += _projector(v[:, r : r + 1])
            else:
                for r, c in enumerate(np.argmax(score, axis=1)):
                    cand[c] += _projector(v[:, r : r + 1])
            val = _local_value(cand, g)
            if val > best_val:
                best, best_val = cand, val
        return self.refine_pairs(best, g, rank_one)

    def refine_pairs(self, stack, g, rank_one):
        d = stack.shape[0]
        stack = stack.copy()
        val = _local_value(stack, g)
        for _ in range(100):
            start = val
            for a in range(d):
                for b in range(a + 1, d):
                    p = stack[a] + stack[b]
                    w, v = hermitian_eig(0.5 * (p + p.conj().T))
                    u = v[:, w > 0.5]
                    if u.shape[1] == 0:
                        continue
                    sub = u.conj().T @ (g[a] - g[b]) @ u
                    sw, sv = hermitian_eig(0.5 * (sub + sub.conj().T))
                    keep = sv[:, :1] if rank_one else sv[:, sw > 0]
                    ma = _projector(u @ keep)
                    trial = stack.copy()
                    trial[a], trial[b] = ma, _projector(u) - ma
                    tval = _local_value(trial, g)
                    if tval > val:
                        stack, val = trial, tval
            if val - start < self.cfg.tol:
                break
        return stack

    def run(self, seed_seq, index):
        rng = make_rng(seed_seq)
        rank_one = self.cfg.projective
        povms = self.init_povms(rng)
        history = []
        value = -np.inf
        converged = False
        it = 0
        psi = None
        for it in range(1, self.cfg.max_iters + 1):
            b = bell_operator(self.f, povms)
            w, v = hermitian_eig(b)
            psi = v[:, 0]
            for n in range(self.N):
                for s in range(self.sc.settings[n]):
                    g = self.environment(psi, povms, n, s)
                    povms[n][s] = self.update_measurement(g, povms[n][s], rank_one)
            new = float(np.real(psi.conj() @ bell_operator(self.f, povms) @ psi))
            if not np.isfinite(new):
                raise ValidationError("see-saw objective became non-finite")
            history.append(new)
            if len(history) > 1 and new < history[-2] - 1e-9 * max(1.0, abs(new)):
                raise RuntimeError(f"see-saw objective decreased: {history[-2]} -> {new}")
            improvement = new - value
            value = new
            if improvement < self.cfg.tol:
                converged = True
                break
        return value, psi, povms, it, converged, index, tuple(history)


def seesaw(f: BellFunctional, dims, config: SeesawConfig = None, **overrides) -> ViolationReport:
    """Alternating maximization of tr[rho B] over a pure state and each party's measurements.

    The reported ratio is a lower bound on the largest achievable violation.
    """
    cfg = SeesawConfig(**overrides) if config is None else config
    sc = f.scenario
    dims = tuple(int(d) for d in dims)
    if len(dims) != sc.parties or any(d < 1 for d in dims):
        raise DimensionError(f"dims {dims} do not fit {sc.parties} parties")
    if cfg.projective and dims != sc.outcomes:
        raise DimensionError(f"rank-1 projective search needs dims == outcomes {sc.outcomes}, got {dims}")
    if cfg.restarts < 1 or cfg.max_iters < 1:
        raise ValidationError("restarts and max_iters must be >= 1")
    norm = lhv_constants(f).lhv_norm
    if norm <= 0.0:
        raise ValidationError("degenerate functional: LHV norm is 0")
    engine = _Seesaw(f, dims, cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    threads = max(1, min(cfg.threads, cfg.restarts))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(engine.run, seeds, range(cfg.restarts)))
    else:
        results = [engine.run(s, i) for i, s in enumerate(seeds)]
    best = max(results, key=lambda r: (r[0], -r[5]))
    value, psi, povms, iters, converged, index, history = best
    rho = np.outer(psi, psi.conj())
    rho = rho / np.trace(rho).real
    model = QuantumModel(dims, rho, tuple(tuple(site) for site in povms), projective=True)
    return ViolationReport(value, norm, abs(value) / norm, model, iters, converged, index, history)


# -- CHSH brute-force oracle ------------------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2.0)


def _planar(theta):
    return np.cos(theta) * _SZ + np.sin(theta) * _SX


def qubit_observable_povm(theta: float) -> np.ndarray:
    """Projective measurement of cos(t) Z + sin(t) X; outcome 0 is the +1 eigenspace."""
    a = _planar(theta)
    return np.stack([(np.eye(2) + a) / 2, (np.eye(2) - a) / 2])


def chsh_singlet_value(a0, a1, b0, b1) -> float:
    psi = singlet()

    def corr(x, y):
        return float(np.real(psi.conj() @ np.kron(_planar(x), _planar(y)) @ psi))

    return corr(a0, b0) + corr(a0, b1) + corr(a1, b0) - corr(a1, b1)


def grid_oracle_chsh(resolution: int) -> float:
    """Largest singlet CHSH value over a uniform grid of four planar measurement angles.

    Exhaustive over the grid: for fixed Alice angles the two Bob angles
    separate, so each is maximized independently.
    """
    if resolution < 8:
        raise ValidationError("resolution must be >= 8")
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    psi = singlet()
    ops = np.array([_planar(t) for t in theta])
    pt = psi.reshape(2, 2)
    corr = np.real(np.einsum("ik,aij,bkl,jl->ab", pt.conj(), ops, ops, pt))
    best = -np.inf
    for a0 in range(resolution):
        plus = (corr[a0][None, :] + corr).max(axis=1)
        minus = (corr[a0][None, :] - corr).max(axis=1)
        best = max(best, float((plus + minus).max()))
    return best


def model_to_json(m: QuantumModel) -> dict:
    return {
        "dims": list(m.dims),
        "projective": bool(m.projective),
        "state": matrix_to_json(m.state),
        "povms": [[[matrix_to_json(e) for e in stack] for stack in site] for site in m.povms],
    }


def model_from_json(obj) -> QuantumModel:
    try:
        dims = tuple(int(d) for d in obj["dims"])
        state = matrix_from_json(obj["state"])
        povms = tuple(tuple(np.stack([matrix_from_json(e) for e in stack]) for stack in site) for site in obj["povms"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model: {exc}") from exc
    if state.shape[1] == 1:
        state = state / np.linalg.norm(state)
        state = state @ state.conj().T
    return QuantumModel(dims, state, povms, bool(obj.get("projective", False)))
