"""Attainability and consistency checks, runnable from the CLI.

Each check returns a ``Check`` with the measured quantities and the
tolerance it was held to.  Reports contain no timings so repeated runs with
the same seed are byte-identical.
"""

import inspect
from typing import NamedTuple

import numpy as np

from .bounds import BoundQuery, best_known, corollary_projective, theorem1
from .config import DEFAULT_SEED
from .quantum import SeesawConfig, grid_oracle_chsh, quantum_behavior, quantum_envelope, seesaw
from .scenario import bell_value, chsh, lhv_constants, mermin_klyshko
from .source import (
    build_source_operator,
    covering_estimate,
    decompose,
    ghz_state,
    partial_trace_error,
    verify_dilation,
)
from .tensor import flip_operator, make_rng, mc_tensor_positive, random_pure_state, trace_norm

SQRT2 = float(np.sqrt(2.0))


class Check(NamedTuple):
    name: str
    passed: bool
    tolerance: float
    detail: dict


def _report_ok(report, query, tol):
    bound = best_known(query).best
    return report.ratio <= bound + tol, bound


def check_chsh(seed=DEFAULT_SEED, restarts=8) -> Check:
    tol = 1e-6
    c = lhv_constants(chsh())
    rep = seesaw(chsh(), (2, 2), SeesawConfig(restarts=restarts, seed=seed))
    grid = grid_oracle_chsh(360)
    cp = corollary_projective(2, 2, 2)
    independent = bell_value(chsh(), quantum_behavior(rep.model))
    ok = (
        c.sup == 2.0
        and c.inf == -2.0
        and abs(rep.quantum_value - 2 * SQRT2) <= tol
        and abs(independent - rep.quantum_value) <= 1e-9
        and abs(grid - rep.quantum_value) <= 1e-3
        and abs(rep.ratio - cp) <= tol
    )
    return Check("chsh-attainability", ok, tol, {
        "lhv_sup": c.sup, "lhv_inf": c.inf, "seesaw_value": rep.quantum_value,
        "bell_value_of_model": independent, "grid_oracle_360": grid, "ratio": rep.ratio,
        "corollary_projective_2_2_2": cp, "converged": rep.converged,
    })


def check_mermin_klyshko(seed=DEFAULT_SEED, restarts=32) -> Check:
    tol = 1e-5
    f = mermin_klyshko(3)
    rep = seesaw(f, (2, 2, 2), SeesawConfig(restarts=restarts, seed=seed))
    independent = bell_value(f, quantum_behavior(rep.model)) / lhv_constants(f).lhv_norm
    target = 2.0 ** ((3 - 1) / 2)
    ok = abs(rep.ratio - target) <= tol and abs(independent - rep.ratio) <= 1e-9
    return Check("mermin-klyshko-attainability", ok, tol, {
        "ratio": rep.ratio, "target": target, "ratio_from_model": independent,
        "lhv_norm": rep.lhv_norm, "converged": rep.converged,
    })


def check_seesaw_consistency(seed=DEFAULT_SEED) -> Check:
    tol = 1e-6
    rows = []
    ok = True
    for f, dims, q in (
        (chsh(), (2, 2), BoundQuery(2, 2, 2, "projective")),
        (mermin_klyshko(3), (2, 2, 2), BoundQuery(2, 3, 2, "projective")),
    ):
        rep = seesaw(f, dims, SeesawConfig(restarts=8, seed=seed))
        good, bound = _report_ok(rep, q, tol)
        ok &= good
        rows.append({"N": q.N, "ratio": rep.ratio, "best_known": bound})
    return Check("seesaw-below-best-known", ok, tol, {"reports": rows})


def check_source_structure(seed=DEFAULT_SEED, states=50, trials=20) -> Check:
    rng = make_rng(seed)
    worst_tr = worst_pt = worst_dil = 0.0
    for _ in range(states):
        d = int(rng.choice([2, 3]))
        N = int(rng.choice([2, 3]))
        settings = [int(rng.integers(1, 4)) for _ in range(N - 1)]
        pivot = int(rng.integers(N))
        psi = random_pure_state(rng, d**N)
        t = build_source_operator(decompose(psi, d, pivot_site=pivot), settings)
        worst_tr = max(worst_tr, abs(np.trace(t.operator) - 1.0))
        worst_pt = max(worst_pt, partial_trace_error(t, psi))
        worst_dil = max(worst_dil, verify_dilation(t, psi, trials, int(rng.integers(2**31))))
    ok = worst_tr <= 1e-10 and worst_pt <= 1e-10 and worst_dil <= 1e-9
    return Check("source-operator-structure", ok, 1e-10, {
        "states": states, "trace_error": float(worst_tr), "partial_trace_error": worst_pt,
        "dilation_error": worst_dil, "dilation_tolerance": 1e-9,
    })


def check_covering(seed=DEFAULT_SEED, tables=100) -> Check:
    rng = make_rng(seed)
    worst_gap = -np.inf
    for _ in range(tables):
        d = int(rng.integers(2, 5))
        N = int(rng.integers(2, 5))
        b = np.abs(rng.standard_normal(d ** (N - 1)))
        b /= np.linalg.norm(b)
        est = covering_estimate(b, d, N)
        worst_gap = max(worst_gap, est.estimate - est.theorem_bound)
    uni_err = ghz_err = 0.0
    for d in range(2, 5):
        for N in range(2, 5):
            u = np.full(d ** (N - 1), d ** (-(N - 1) / 2))
            est = covering_estimate(u, d, N)
            uni_err = max(uni_err, abs(est.estimate - est.theorem_bound))
            g = covering_estimate(decompose(ghz_state(d, N), d).beta, d, N)
            ghz_err = max(ghz_err, abs(g.estimate - (2 ** (N - 1) * (d - 1) + 1)))
    ok = worst_gap <= 1e-9 and uni_err <= 1e-10 and ghz_err <= 1e-10
    return Check("covering-estimate-chain", ok, 1e-10, {
        "max_estimate_minus_bound": float(worst_gap), "uniform_equality_error": uni_err, "ghz_error": ghz_err,
    })


def check_flip(seed=DEFAULT_SEED, samples=10_000) -> Check:
    norms = {}
    verdicts = {}
    ok = True
    for d in range(2, 7):
        v = flip_operator(d)
        norms[d] = trace_norm(v)
        ok &= abs(norms[d] - d * d) <= 1e-9
        res = mc_tensor_positive(v, (d, d), samples, seed + d)
        verdicts[d] = res.verdict
        ok &= not res.violated
    return Check("flip-operator-facts", ok, 1e-9, {"trace_norms": norms, "tensor_positivity": verdicts})


def check_bound_grid() -> Check:
    worst = []
    ok = True
    for d in range(2, 11):
        for N in range(3, 7):
            p = 2 ** (N - 1)
            prior = min(p * d ** (N - 1) - p + 1, (2 * d) ** (N - 1))
            if not theorem1(d, N) < prior:
                ok = False
                worst.append([d, N])
    return Check("theorem1-improves-priors", ok, 0.0, {"failures": worst})


def check_envelope() -> Check:
    up = quantum_envelope(chsh(), SQRT2)[1]
    lo = quantum_envelope((2.0, 1.0), 3.0)[0]
    ok = abs(up - 2 * SQRT2) <= 1e-12 and abs(lo) <= 1e-12
    return Check("envelope-arithmetic", ok, 1e-12, {"chsh_upper": up, "lower_for_lhv_range_2_1_at_3": lo})


SUITES = {
    "attainability": (check_chsh, check_mermin_klyshko, check_seesaw_consistency),
    "all": (check_chsh, check_mermin_klyshko, check_source_structure, check_covering, check_flip,
            check_bound_grid, check_envelope, check_seesaw_consistency),
}


def run_suite(name: str, seed: int = DEFAULT_SEED) -> list:
    checks = []
    for fn in SUITES[name]:
        kwargs = {"seed": seed} if "seed" in inspect.signature(fn).parameters else {}
        checks.append(fn(**kwargs))
    return checks
