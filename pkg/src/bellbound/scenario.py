"""Correlation scenarios with finite outcome sets.

A Bell functional and a behavior are both dense real tables with axes
``(s_1, ..., s_N, l_1, ..., l_N)``: settings first, then outcomes.  Setting
and outcome labels are 0-based.  Binary outcomes are read as the values
+1 (label 0) and -1 (label 1) whenever a correlation form is needed.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .config import LHV_BUDGET, TOL
from .errors import BudgetError, ValidationError

__all__ = [
    "BellScenario",
    "BellFunctional",
    "Behavior",
    "LhvConstants",
    "SignalingReport",
    "bell_value",
    "correlation_function",
    "lhv_constants",
    "is_nonsignaling",
    "deterministic_behavior",
    "correlation_functional",
    "builtin_functional",
    "chsh",
    "mermin_klyshko",
    "pr_box",
    "functional_to_json",
    "functional_from_json",
    "behavior_to_json",
    "behavior_from_json",
]


@dataclass(frozen=True)
class BellScenario:
    settings: tuple
    outcomes: tuple

    def __post_init__(self):
        settings = tuple(int(s) for s in self.settings)
        outcomes = tuple(int(d) for d in self.outcomes)
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "outcomes", outcomes)
        if len(settings) != len(outcomes):
            raise ValidationError(f"settings {settings} and outcomes {outcomes} disagree on the number of parties")
        if len(settings) < 2:
            raise ValidationError(f"a scenario needs N >= 2 parties, got {len(settings)}")
        if any(s < 1 for s in settings):
            raise ValidationError(f"every party needs >= 1 setting, got {settings}")
        if any(d < 2 for d in outcomes):
            raise ValidationError(f"every party needs >= 2 outcomes, got {outcomes}")

    @classmethod
    def uniform(cls, parties: int, settings: int = 2, outcomes: int = 2) -> "BellScenario":
        return cls((settings,) * parties, (outcomes,) * parties)

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def shape(self) -> tuple:
        return self.settings + self.outcomes

    @property
    def strategy_count(self) -> int:
        """Number of deterministic local strategies, prod_n d_n ** S_n."""
        n = 1
        for s, d in zip(self.settings, self.outcomes):
            n *= d**s
        return n

    def joint_settings(self):
        return product(*(range(s) for s in self.settings))

    def to_json(self) -> dict:
        return {"parties": self.parties, "settings": list(self.settings), "outcomes": list(self.outcomes)}

    @classmethod
    def from_json(cls, obj) -> "BellScenario":
        try:
            sc = cls(tuple(obj["settings"]), tuple(obj["outcomes"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed scenario: {exc}") from exc
        if "parties" in obj and int(obj["parties"]) != sc.parties:
            raise ValidationError(f"scenario.parties = {obj['parties']} but {sc.parties} settings given")
        return sc


def _table(scenario: BellScenario, values, what: str) -> np.ndarray:
    t = np.array(values, dtype=float)
    if t.shape != scenario.shape:
        raise ValidationError(f"{what} table has shape {t.shape}, scenario needs {scenario.shape}")
    if not np.all(np.isfinite(t)):
        raise ValidationError(f"{what} table has non-finite entries")
    t.setflags(write=False)
    return t


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Real coefficients f_(s_1..s_N)(l_1..l_N) of a linear combination of averages.

    The all-zero table is accepted (it is a valid linear combination) but is
    rejected by anything that divides by the LHV norm.
    """

    scenario: BellScenario
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _table(self.scenario, self.coeffs, "coefficient"))

    def __neg__(self):
        return BellFunctional(self.scenario, -self.coeffs)

    def __mul__(self, c):
        return BellFunctional(self.scenario, float(c) * self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other):
        _same(self.scenario, other.scenario)
        return BellFunctional(self.scenario, self.coeffs + other.coeffs)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


@dataclass(frozen=True, eq=False)
class Behavior:
    """One joint outcome distribution per joint setting tuple."""

    scenario: BellScenario
    probs: np.ndarray

    def __post_init__(self):
        p = _table(self.scenario, self.probs, "probability")
        N = self.scenario.parties
        if p.min() < -TOL.negative_probability:
            raise ValidationError(f"negative probability {p.min():.3e}")
        sums = p.sum(axis=tuple(range(N, 2 * N)))
        dev = float(np.max(np.abs(sums - 1.0)))
        if dev > TOL.probability:
            raise ValidationError(f"a joint distribution does not sum to 1 (deviation {dev:.3e})")
        object.__setattr__(self, "probs", p)

    def distribution(self, joint_setting) -> np.ndarray:
        return self.probs[tuple(joint_setting)]

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        """Convex combination ``weight * self + (1 - weight) * other``."""
        _same(self.scenario, other.scenario)
        return Behavior(self.scenario, weight * self.probs + (1.0 - weight) * other.probs)


class LhvConstants(NamedTuple):
    sup: float
    inf: float
    lhv_norm: float
    argsup: tuple  # argsup[n][s] = outcome chosen by party n at setting s
    arginf: tuple


class SignalingReport(NamedTuple):
    nonsignaling: bool
    worst: float
    tol: float

    def __bool__(self):
        return self.nonsignaling


def _same(a: BellScenario, b: BellScenario):
    if a != b:
        raise ValidationError(f"scenario mismatch: {a} vs {b}")


def bell_value(f: BellFunctional, p: Behavior) -> float:
    """Sum over settings and outcomes of coefficient times probability."""
    _same(f.scenario, p.scenario)
    return float(np.sum(f.coeffs * p.probs))


def _pm_values(d: int) -> np.ndarray:
    if d != 2:
        raise ValidationError("default +-1 relabeling only applies to binary outcomes; pass outcome_values")
    return np.array([1.0, -1.0])


def correlation_function(p: Behavior, joint_setting, sites=None, outcome_values=None) -> float:
    """Expectation of the product of relabeled outcomes on ``sites`` for one joint setting.

    ``outcome_values[n]`` maps party n's labels to reals; default is +1/-1 for
    binary outcomes.  ``sites=None`` gives the full correlation function.
    """
    sc = p.scenario
    N = sc.parties
    sites = range(N) if sites is None else sites
    sites = sorted({int(n) for n in sites})
    if not sites:
        raise ValidationError("correlation function needs a non-empty site set")
    if sites[0] < 0 or sites[-1] >= N:
        raise ValidationError(f"sites {sites} out of range for {N} parties")
    dist = p.distribution(joint_setting)
    weight = np.ones(sc.outcomes)
    for n in sites:
        vals = _pm_values(sc.outcomes[n]) if outcome_values is None else np.asarray(outcome_values[n], float)
        if vals.shape != (sc.outcomes[n],):
            raise ValidationError(f"party {n} needs {sc.outcomes[n]} outcome values")
        shape = [1] * N
        shape[n] = sc.outcomes[n]
        weight = weight * vals.reshape(shape)
    return float(np.sum(dist * weight))


def _digits_to_strategy(digits, scenario: BellScenario) -> tuple:
    out, i = [], 0
    for s in scenario.settings:
        out.append(tuple(int(x) for x in digits[i : i + s]))
        i += s
    return tuple(out)


def lhv_constants(f: BellFunctional, budget: int = LHV_BUDGET) -> LhvConstants:
    """Exact LHV constants by streaming enumeration of deterministic strategies.

    Raises BudgetError when prod_n d_n ** S_n exceeds ``budget``.
    """
    sc = f.scenario
    count = sc.strategy_count
    if count > budget:
        raise BudgetError(f"enumeration too large: {count} deterministic strategies (budget {budget})", count, budget)
    coeffs = np.ascontiguousarray(f.coeffs, dtype=np.float64).ravel()
    hi, lo, dhi, dlo = kernels.lhv_extrema(
        coeffs, np.asarray(sc.settings, dtype=np.int64), np.asarray(sc.outcomes, dtype=np.int64)
    )
    hi, lo = float(hi), float(lo)
    return LhvConstants(hi, lo, max(abs(hi), abs(lo)), _digits_to_strategy(dhi, sc), _digits_to_strategy(dlo, sc))


def deterministic_behavior(scenario: BellScenario, strategy: Sequence[Sequence[int]]) -> Behavior:
    """Point-mass behavior where party n answers ``strategy[n][s]`` to setting s."""
    p = np.zeros(scenario.shape)
    for s in scenario.joint_settings():
        lam = tuple(strategy[n][s[n]] for n in range(scenario.parties))
        p[s + lam] = 1.0
    return Behavior(scenario, p)


def is_nonsignaling(p: Behavior, tol: float = TOL.signaling) -> SignalingReport:
    """Check that marginals on every proper site subset ignore the other sites' settings."""
    sc = p.scenario
    N = sc.parties
    worst = 0.0
    for r in range(1, N):
        for sub in combinations(range(N), r):
            rest = [n for n in range(N) if n not in sub]
            marg = p.probs.sum(axis=tuple(N + n for n in rest))
            axes = tuple(rest)
            spread = marg.max(axis=axes) - marg.min(axis=axes)
            worst = max(worst, float(spread.max()))
    return SignalingReport(worst <= tol, worst, tol)


def correlation_functional(scenario: BellScenario, terms: dict) -> BellFunctional:
    """Full-correlation functional sum_s c_s <prod_n x_n^(s_n)> over +-1 outcomes.

    ``terms`` maps joint-setting tuples to coefficients.
    """
    if any(d != 2 for d in scenario.outcomes):
        raise ValidationError("correlation functionals need binary outcomes")
    sign = np.ones((2,) * scenario.parties)
    for n in range(scenario.parties):
        shape = [1] * scenario.parties
        shape[n] = 2
        sign = sign * np.array([1.0, -1.0]).reshape(shape)
    coeffs = np.zeros(scenario.shape)
    for s, c in terms.items():
        coeffs[tuple(s)] += float(c) * sign
    return BellFunctional(scenario, coeffs)


def chsh() -> BellFunctional:
    """<A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>; LHV constants (2, -2)."""
    terms = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}
    return correlation_functional(BellScenario.uniform(2), terms)


def _mk_terms(N: int) -> dict:
    # M_1 = a, M'_1 = a'; M_n = M_{n-1}(x+x')/2 + M'_{n-1}(x-x')/2 and primes swapped
    def times(poly, w0, w1, out):
        # out += poly * (w0 x + w1 x')
        for s, c in poly.items():
            out[s + (0,)] = out.get(s + (0,), 0) + w0 * c
            out[s + (1,)] = out.get(s + (1,), 0) + w1 * c

    h = Fraction(1, 2)
    m, mp = {(0,): Fraction(1)}, {(1,): Fraction(1)}
    for _ in range(1, N):
        new, newp = {}, {}
        times(m, h, h, new)
        times(mp, h, -h, new)
        times(mp, h, h, newp)
        times(m, -h, h, newp)
        m, mp = new, newp
    return {s: 2 * c for s, c in m.items() if c != 0}


def mermin_klyshko(N: int) -> BellFunctional:
    """Mermin-Klyshko functional, scaled so its LHV norm is 2 for every N.

    With this scaling the quantum maximum is 2 * 2**((N-1)/2); N = 2 is CHSH
    and N = 3 is <A'BC> + <AB'C> + <ABC'> - <A'B'C'>.
    """
    if N < 2:
        raise ValidationError("Mermin-Klyshko needs N >= 2")
    return correlation_functional(BellScenario.uniform(N), _mk_terms(N))


def builtin_functional(name: str, N: int = None) -> BellFunctional:
    key = name.lower().replace("-", "_")
    if key == "chsh":
        return chsh()
    if key in ("mermin_klyshko", "mk"):
        return mermin_klyshko(3 if N is None else N)
    if key.startswith("mk") and key[2:].isdigit():
        return mermin_klyshko(int(key[2:]))
    raise ValidationError(f"unknown built-in functional {name!r} (known: chsh, mermin_klyshko, mkN)")


def pr_box() -> Behavior:
    """Popescu-Rohrlich box: outcomes satisfy a XOR b = x AND y, uniformly."""
    sc = BellScenario.uniform(2)
    p = np.zeros(sc.shape)
    for x, y, a, b in product(range(2), repeat=4):
        if (a ^ b) == (x & y):
            p[x, y, a, b] = 0.5
    return Behavior(sc, p)


def _entries_to_table(scenario: BellScenario, entries, key: str) -> np.ndarray:
    t = np.zeros(scenario.shape)
    N = scenario.parties
    for i, e in enumerate(entries):
        try:
            s, lam, v = tuple(e["s"]), tuple(e["lam"]), float(e[key])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"entry {i}: malformed ({exc})") from exc
        if len(s) != N or len(lam) != N:
            raise ValidationError(f"entry {i}: s and lam need {N} components")
        for n in range(N):
            if not (0 <= s[n] < scenario.settings[n] and 0 <= lam[n] < scenario.outcomes[n]):
                raise ValidationError(f"entry {i}: index {s}/{lam} out of range")
        t[s + lam] += v
    return t


def _table_to_entries(table: np.ndarray, N: int, key: str) -> list:
    out = []
    for idx in zip(*np.nonzero(table)):
        idx = tuple(int(i) for i in idx)
        out.append({"s": list(idx[:N]), "lam": list(idx[N:]), key: float(table[idx])})
    return out


def functional_to_json(f: BellFunctional) -> dict:
    return {"scenario": f.scenario.to_json(), "coeffs": _table_to_entries(f.coeffs, f.scenario.parties, "c")}


def functional_from_json(obj) -> BellFunctional:
    if not isinstance(obj, dict) or "scenario" not in obj:
        raise ValidationError("functional object needs a 'scenario' field")
    sc = BellScenario.from_json(obj["scenario"])
    return BellFunctional(sc, _entries_to_table(sc, obj.get("coeffs", []), "c"))


def behavior_to_json(p: Behavior) -> dict:
    return {"scenario": p.scenario.to_json(), "p": _table_to_entries(p.probs, p.scenario.parties, "p")}


def behavior_from_json(obj) -> Behavior:
    if not isinstance(obj, dict) or "scenario" not in obj:
        raise ValidationError("behavior object needs a 'scenario' field")
    sc = BellScenario.from_json(obj["scenario"])
    return Behavior(sc, _entries_to_table(sc, obj.get("p", []), "p"))
