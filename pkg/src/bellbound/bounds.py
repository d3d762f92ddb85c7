"""Closed-form upper bounds on the maximal quantum violation by N-qudit states.

Values that are exact integers are returned as ``int``; fractional powers as
``float``.  Every entry also carries an exact string form for reports.
"""

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import ValidationError

__all__ = [
    "BoundQuery",
    "BoundEntry",
    "BoundReport",
    "theorem1",
    "ghz_bound",
    "corollary_generalized",
    "corollary_projective",
    "prior_bounds",
    "best_known",
    "comparison_table",
    "comparison_csv",
]


def _check(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _root_power(base: int, num: int, den: int):
    """base ** (num/den) as ``(value, exact_str)``, integer when the result is integral."""
    if num % den == 0:
        v = base ** (num // den)
        return v, str(v)
    big = base**num
    r = round(big ** (1.0 / den))
    for cand in (r - 1, r, r + 1):
        if cand > 0 and cand**den == big:
            return cand, str(cand)
    return big ** (1.0 / den), f"{base}^({num}/{den})"


def theorem1(d: int, N: int) -> int:
    """(2d - 1)^(N - 1): any N-qudit state, any settings and outcomes."""
    _check("d", d, 2)
    _check("N", N, 2)
    return (2 * d - 1) ** (N - 1)


def ghz_bound(d: int, N: int) -> int:
    """2^(N-1) (d - 1) + 1 for the N-qudit GHZ state."""
    _check("d", d, 2)
    _check("N", N, 2)
    return 2 ** (N - 1) * (d - 1) + 1


def corollary_generalized(d: int, S: int, N: int) -> int:
    """(2 min(d, S) - 1)^(N - 1) for S settings per site, generalized measurements."""
    _check("d", d, 2)
    _check("S", S, 1)
    _check("N", N, 2)
    return (2 * min(d, S) - 1) ** (N - 1)


def _projective(d, S, N):
    if S == 1:
        return 1, "1"
    gen = corollary_generalized(d, S, N)
    if S == 2:
        cap = 3 ** (N - 1)
        dim_val, dim_str = _root_power(d, N - 1, 2)
    else:
        cap = gen
        dim_val, dim_str = _root_power(d, S * (N - 1), 2)
    if dim_val <= cap:
        return dim_val, dim_str
    return cap, str(cap)


def corollary_projective(d: int, S: int, N: int):
    """Projective-measurement bound for S settings per site.

    S = 2: min(d^((N-1)/2), 3^(N-1)); S >= 3: min(d^(S(N-1)/2), (2 min(d,S) - 1)^(N-1)).
    S = 1 returns 1: a single setting per site always admits an LHV model.
    """
    _check("d", d, 2)
    _check("S", S, 1)
    _check("N", N, 2)
    return _projective(d, S, N)[0]


class BoundEntry(NamedTuple):
    label: str
    value: Optional[float]
    exact: str
    applicable: bool
    source: str


@dataclass(frozen=True)
class BoundQuery:
    d: int
    N: int
    S: Optional[int] = None  # None means unbounded settings
    measurements: str = "generalized"
    state: str = "arbitrary"

    def __post_init__(self):
        _check("d", self.d, 2)
        _check("N", self.N, 2)
        if self.S is not None:
            _check("S", self.S, 1)
        if self.measurements not in ("generalized", "projective"):
            raise ValidationError(f"measurements must be 'generalized' or 'projective', got {self.measurements!r}")
        if self.state not in ("arbitrary", "ghz"):
            raise ValidationError(f"state must be 'arbitrary' or 'ghz', got {self.state!r}")


class BoundReport(NamedTuple):
    query: BoundQuery
    entries: tuple
    best: float
    best_label: str

    def to_json(self) -> dict:
        q = self.query
        return {
            "query": {"d": q.d, "N": q.N, "S": "unbounded" if q.S is None else q.S,
                      "measurements": q.measurements, "state": q.state},
            "entries": [e._asdict() for e in self.entries],
            "best": self.best,
            "best_label": self.best_label,
        }


def prior_bounds(d: int, N: int, state: str = "arbitrary") -> list:
    """Earlier precise bounds, each flagged applicable or not for (d, N, state)."""
    _check("d", d, 2)
    _check("N", N, 2)
    ghz = state == "ghz"
    p = 2 ** (N - 1)
    d1 = p * d ** (N - 1) - p + 1
    d2 = (2 * d) ** (N - 1)
    return [
        BoundEntry("prior_bipartite", 2 * d - 1, str(2 * d - 1), N == 2,
                   "2d-1: earlier bipartite bound, arbitrary two-qudit state"),
        BoundEntry("prior_bipartite_operator_space", 2 * d, str(2 * d), N == 2,
                   "2d: operator-space bound, arbitrary two-qudit state"),
        BoundEntry("prior_two_qudit_ghz", None, "C*d/sqrt(ln d), C unknown", N == 2 and ghz,
                   "C d / sqrt(ln d): two-qudit GHZ state; universal constant C not known, no numeric value"),
        BoundEntry("prior_ghz", ghz_bound(d, N), str(ghz_bound(d, N)), N >= 3 and ghz,
                   "2^(N-1)(d-1)+1: earlier bound for the N-qudit GHZ state"),
        BoundEntry("prior_multipartite", d1, str(d1), N >= 3,
                   "2^(N-1) d^(N-1) - 2^(N-1) + 1: earlier bound, arbitrary N-qudit state"),
        BoundEntry("prior_multipartite_operator_space", d2, str(d2), N >= 3,
                   "(2d)^(N-1): operator-space bound, arbitrary N-qudit state"),
    ]


def best_known(q: BoundQuery) -> BoundReport:
    """All bounds that apply to the query and the smallest of them."""
    d, N, S = q.d, q.N, q.S
    proj = q.measurements == "projective"
    ghz = q.state == "ghz"
    t1 = theorem1(d, N)
    entries = [BoundEntry("theorem1", t1, str(t1), True, "(2d-1)^(N-1): any N-qudit state, generalized measurements")]
    if S is not None:
        cg = corollary_generalized(d, S, N)
        entries.append(BoundEntry("corollary_generalized", cg, str(cg), True,
                                  "(2min(d,S)-1)^(N-1): S settings per site, generalized measurements"))
        cp, cp_exact = _projective(d, S, N)
        entries.append(BoundEntry("corollary_projective", cp, cp_exact, proj,
                                  "min(d^(S(N-1)/2), covering term): S settings per site, projective measurements"))
    g = ghz_bound(d, N)
    entries.append(BoundEntry("ghz_bound", g, str(g), ghz, "2^(N-1)(d-1)+1: N-qudit GHZ state"))
    entries.extend(prior_bounds(d, N, q.state))
    usable = [e for e in entries if e.applicable and e.value is not None]
    best = min(usable, key=lambda e: e.value)
    return BoundReport(q, tuple(entries), best.value, best.label)


def comparison_table(ds, Ns) -> list:
    rows = []
    for d in ds:
        for N in Ns:
            p = 2 ** (N - 1)
            rows.append({
                "d": d,
                "N": N,
                "theorem1": theorem1(d, N),
                "ghz": ghz_bound(d, N),
                "prior_multipartite": p * d ** (N - 1) - p + 1,
                "prior_multipartite_operator_space": (2 * d) ** (N - 1),
            })
    return rows


def comparison_csv(ds, Ns) -> str:
    rows = comparison_table(ds, Ns)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
