"""
Experiment runners behind the command line.

Each runner takes a resolved parameter map and returns an
:class:`ExperimentResult`: ordered rows, the extremal ratios that pins are
checked against, and any hard identity failures.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Iterable, Optional

import numpy as np

from .arith import as_modulus, lcm, squarefree_upto
from .config import h_values, parse_int_list, parse_number_list, resolve_qs
from .errors import ConfigError, PreconditionViolated
from .gaps import RATIO_COLUMNS, gap_statistics
from .identities import (
    constrained_product_sum,
    f_correlation_scan,
    kq_expansion_all,
    product_expansion_all,
    representation_histogram,
    singular_series_expsum,
    tolerance,
)
from .moments import moment_direct, moment_expsum_k2, theoretical_bound
from .special_sets import (
    ResidueClassSystem,
    corollary1_experiment,
    quadratic_residues,
    random_system,
    square_variance_expsum,
    squares_profile,
    squares_system,
    thm02_check,
    thm41_check,
    weyl_constants,
)
from .tuples import DEFAULT_MEM_BUDGET, OffsetSet, density, sieve_tuple_starts


@dataclass(frozen=True)
class Extreme:
    """An extremal observed ratio; ``kind`` is ``"max"`` or ``"min"``."""

    kind: str
    value: float
    where: dict = field(default_factory=dict)

    def merge(self, other: "Extreme") -> "Extreme":
        if self.kind == "max":
            return other if other.value > self.value else self
        return other if other.value < self.value else self


@dataclass
class ExperimentResult:
    columns: tuple
    rows: list = field(default_factory=list)
    extremes: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def observe(self, name: str, kind: str, value: float, **where) -> None:
        ext = Extreme(kind, float(value), where)
        self.extremes[name] = self.extremes[name].merge(ext) if name in self.extremes else ext


def ordered_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    """``map`` fanned out over threads; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _offsets(params: dict, default) -> OffsetSet:
    raw = params.get("offsets", default)
    try:
        return OffsetSet.parse(raw) if isinstance(raw, str) else OffsetSet(raw)
    except ValueError as exc:
        raise ConfigError("offsets", str(exc)) from None


def _offset_family(params: dict, default: list) -> list[OffsetSet]:
    if params.get("offsets") is not None:
        return [_offsets(params, None)]
    return [OffsetSet(d) for d in params.get("offset_sets", default)]


def _ints(params: dict, key: str, default) -> list[int]:
    return parse_int_list(params.get(key, default), key)


def _h_spec(params: dict, default):
    return params.get("h", params.get("h_grid", default))


def _mem(params: dict) -> int:
    return int(params.get("mem_budget", DEFAULT_MEM_BUDGET))


def _pin_key(*parts) -> str:
    return ".".join(str(p) for p in parts)


def _d_label(D: OffsetSet) -> str:
    return "{" + str(D) + "}"


# --------------------------------------------------------------------------
# verify-identities

IDENTITY_COLUMNS = ("check", "q", "D", "case", "target", "value", "abs_err", "tol", "ok")
IDENTITY_DEFAULT_SETS = [[0], [0, 2], [0, 2, 6]]
SINGULAR_SETS = [[0], [0, 1], [0, 2], [0, 4], [0, 6], [-3, 5]]


def _identity_row(res: ExperimentResult, check, q, D, case, target, value, n_terms) -> None:
    err = abs(complex(value) - complex(target))
    tol = tolerance(n_terms)
    ok = bool(err <= tol)
    res.rows.append({
        "check": check, "q": q, "D": D, "case": case, "target": target,
        "value": complex(value).real, "abs_err": err, "tol": tol, "ok": ok,
    })
    if not ok:
        res.failures.append(f"{check} q={q} D={D} {case}: |err| = {err:.3g} > {tol:.3g}")


def run_verify_identities(params: dict, threads: int = 1) -> ExperimentResult:
    qmax = int(params.get("qmax", 210))
    if qmax < 1:
        raise ConfigError("qmax", "must be >= 1")
    res = ExperimentResult(IDENTITY_COLUMNS)
    qs = squarefree_upto(qmax)

    for q, vals in zip(qs, ordered_map(kq_expansion_all, qs, threads)):
        qm = as_modulus(q)
        for m, v in enumerate(vals.tolist()):
            _identity_row(res, "kq_expansion", q, "", f"m={m}", int(math.gcd(m, q) == 1), v,
                          len(qm.divisors) * q)

    sets = _offset_family(params, IDENTITY_DEFAULT_SETS)
    for q in [x for x in (15, 30, 105, 210) if x <= qmax]:
        qm = as_modulus(q)
        for D in sets:
            starts = sieve_tuple_starts(qm, D).indicator
            vals = product_expansion_all(qm, D)
            for m in range(q):
                _identity_row(res, "product_expansion", q, _d_label(D), f"m={m}",
                              int(starts[m]), vals[m], len(qm.divisors) * q)

    singular_sets = [OffsetSet(d) for d in SINGULAR_SETS]
    for q in squarefree_upto(min(qmax, 105)):
        qm = as_modulus(q)
        for D in singular_sets:
            target = float(density(qm, D).singular)
            _identity_row(res, "singular_series", q, _d_label(D), "", target,
                          singular_series_expsum(qm, D), len(qm.divisors) ** 2 * q)

    divs = [d for d in as_modulus(210).divisors if d > 1]
    for size in (2, 3):
        for r_list in combinations_with_replacement(divs, size):
            hist = representation_histogram(r_list)
            expected = math.prod(r_list) // lcm(r_list)
            bad = int(np.count_nonzero((hist != 0) & (hist != expected)))
            _identity_row(res, "representation", lcm(r_list), "",
                          "r=" + "x".join(map(str, r_list)), 0, bad, 0)

    cf_max = int(params.get("cf_max", 2000))
    C_F, q_at, h_at = f_correlation_scan(cf_max, cf_max)
    res.rows.append({"check": "C_F", "q": q_at, "D": "", "case": f"h={h_at}", "target": "",
                     "value": C_F, "abs_err": 0.0, "tol": 0.0, "ok": True})
    res.observe("identities.C_F", "max", C_F, q=q_at, h=h_at)

    for q_list in ((3, 5), (6, 10), (2, 3, 5), (6, 15, 10), (7, 7)):
        for h in (1, 4, 20):
            cs = constrained_product_sum(q_list, h, C_F)
            res.rows.append({
                "check": "constrained_sum", "q": lcm(q_list), "D": "",
                "case": "q=" + "x".join(map(str, q_list)) + f",h={h}", "target": cs.rhs,
                "value": float(cs.lhs), "abs_err": 0.0, "tol": 0.0, "ok": cs.holds,
            })
            if not cs.holds:
                res.failures.append(f"constrained_sum {q_list} h={h}: {float(cs.lhs)} > {cs.rhs}")
    return res


# --------------------------------------------------------------------------
# moments and bounds-sweep

MOMENT_COLUMNS = (
    "q", "omega", "D", "h", "k", "M_k", "M_k_float", "exact", "M_2_expsum",
    "lemma12_bound", "lemma12_ratio", "lemma21_bound", "lemma21_ratio",
    "thm42_general_bound", "thm42_general_ratio",
)


def _bound_pair(kind: str, observed: float, **kw):
    try:
        rep = theoretical_bound(kind, observed=observed, **kw)
    except PreconditionViolated:
        return None, None
    return rep.bound_value, rep.ratio


def _moment_rows(q: int, D: OffsetSet, hs: list, ks: list, mem: int, expsum: bool) -> list[dict]:
    qm = as_modulus(q)
    rows = []
    for h in hs:
        for k in ks:
            M = moment_direct(qm, D, h, k, mem)
            row = {"q": q, "omega": qm.omega, "D": _d_label(D), "h": h, "k": k,
                   "M_k": M.value, "M_k_float": M.float_value, "exact": True,
                   "M_2_expsum": None}
            if k == 2 and expsum:
                row["M_2_expsum"] = moment_expsum_k2(qm, D, h)
            obs = abs(M.float_value)
            for kind in ("lemma12", "lemma21", "thm42_general"):
                b, r = _bound_pair(kind, obs, q=qm, h=h, k=k, s=D.s)
                row[f"{kind}_bound"], row[f"{kind}_ratio"] = b, r
            rows.append(row)
    return rows


def run_moments(params: dict, threads: int = 1) -> ExperimentResult:
    qs = resolve_qs(params)
    D = _offsets(params, [0, 2])
    ks = _ints(params, "k", [2])
    spec = _h_spec(params, "1..10")
    mem = _mem(params)
    expsum = bool(params.get("expsum", True))
    res = ExperimentResult(MOMENT_COLUMNS)
    for rows in ordered_map(lambda q: _moment_rows(q, D, h_values(spec, q), ks, mem, expsum),
                            qs, threads):
        res.rows.extend(rows)
    return res


def ratio_suite_h(q: int) -> list[int]:
    """``ceil(1/P)`` and ``ceil(10/P)``."""
    P = as_modulus(q).P
    return sorted({math.ceil(1 / P), math.ceil(10 / P)})


def run_bounds_sweep(params: dict, threads: int = 1) -> ExperimentResult:
    if not any(params.get(k) for k in ("q", "q_family", "q_range")):
        params = {**params, "q_family": "primorial:2..6"}
    qs = resolve_qs(params)
    D = _offsets(params, [0, 2])
    ks = _ints(params, "k", [2, 4])
    spec = params.get("h", params.get("h_grid"))
    mem = _mem(params)
    res = ExperimentResult(MOMENT_COLUMNS)

    def one(q):
        hs = h_values(spec, q) if spec is not None else ratio_suite_h(q)
        return _moment_rows(q, D, hs, ks, mem, expsum=False)

    for rows in ordered_map(one, qs, threads):
        for row in rows:
            res.rows.append(row)
            for kind in ("lemma12", "thm42_general"):
                r = row[f"{kind}_ratio"]
                if r is not None:
                    res.observe(_pin_key("moments", kind, _d_label(D), f"k{row['k']}"),
                                "max", r, q=row["q"], h=row["h"])
    return res


# --------------------------------------------------------------------------
# gaps


def run_gaps(params: dict, threads: int = 1) -> ExperimentResult:
    if not any(params.get(k) for k in ("q", "q_family", "q_range")):
        params = {**params, "q_family": "primorial:6"}
    qs = resolve_qs(params)
    D = _offsets(params, [0, 2])
    lams = parse_number_list(params.get("lambda", [2, 3]), "lambda")
    if any(lam < 1 for lam in lams):
        raise ConfigError("lambda", "every lambda must be >= 1")
    mem = _mem(params)
    res = ExperimentResult(RATIO_COLUMNS)

    def one(q):
        qm = as_modulus(q)
        stats = gap_statistics(qm, D, (), mem)
        out = []
        for lam in lams:
            V = stats.V(lam)
            if isinstance(lam, int):
                ratio = float(Fraction(V) * qm.P ** (D.s * lam) / stats.count)
            else:
                ratio = V * float(qm.P) ** (D.s * lam) / stats.count
            bound = stats.count * float(qm.P) ** (-D.s * lam)
            out.append({"q": q, "omega": qm.omega, "lambda": lam, "V_lambda": V,
                        "bound": bound, "ratio": ratio})
        return out

    for rows in ordered_map(one, qs, threads):
        for row in rows:
            res.rows.append(row)
            res.observe(_pin_key("gaps.erdos", _d_label(D), f"lambda{row['lambda']}"),
                        "max", row["ratio"], q=row["q"])
    return res


# --------------------------------------------------------------------------
# squares

SQUARES_COLUMNS = ("q", "omega", "h", "centering", "lhs", "lhs_exact", "lhs_paper",
                   "rhs", "ratio", "ratio_exact", "ratio_paper", "expsum")


def _squares_rows(q: int, hs: list, centering: str, mem: int, expsum: bool) -> list[dict]:
    prof = squares_profile(q, mem)
    rows = []
    for h in hs:
        rep = thm02_check(prof, h)
        ex = rep.extras
        lhs = ex["lhs_exact"] if centering == "exact" else ex["lhs_paper"]
        row = {"q": q, "omega": prof.modulus.omega, "h": h, "centering": centering,
               "lhs": lhs, "lhs_exact": ex["lhs_exact"], "lhs_paper": ex["lhs_paper"],
               "rhs": ex["rhs"], "ratio": float(lhs / ex["rhs"]),
               "ratio_exact": rep.ratio, "ratio_paper": ex["ratio_paper"], "expsum": None}
        if expsum:
            row["expsum"] = square_variance_expsum(q, h)
        rows.append(row)
    return rows


def run_squares(params: dict, threads: int = 1) -> ExperimentResult:
    if not any(params.get(k) for k in ("q", "q_family", "q_range")):
        params = {**params, "q_range": "3..2000"}
    centering = params.get("centering", "exact")
    if centering not in ("exact", "paper"):
        raise ConfigError("centering", "must be 'exact' or 'paper'")
    qs = [q for q in resolve_qs(params) if q % 2 == 1 and q > 1]
    if not qs:
        raise ConfigError("q", "squares needs at least one odd squarefree q > 1")
    spec = _h_spec(params, "log:10")
    mem = _mem(params)
    expsum = bool(params.get("expsum", False))
    res = ExperimentResult(SQUARES_COLUMNS)
    for rows in ordered_map(lambda q: _squares_rows(q, h_values(spec, q), centering, mem, expsum),
                            qs, threads):
        for row in rows:
            res.rows.append(row)
            res.observe("squares.thm02_exact", "max", row["ratio_exact"], q=row["q"], h=row["h"])
    return res


# --------------------------------------------------------------------------
# omega-sets

OMEGA_COLUMNS = ("system", "q", "h", "lhs", "rhs", "ratio")
EPSILON = 0.05


def _hypothesis_ok(system: ResidueClassSystem, eps: float) -> bool:
    return all(p - len(v) > p ** (0.5 + eps) for p, v in system.classes.items())


def corpus_systems(q: int, eps: float = EPSILON) -> list[tuple[str, ResidueClassSystem]]:
    """Singleton, squares (Omega_p the non-residues), ``Omega_p`` = squares
    with zero, and random systems mod q meeting
    ``p - |Omega_p| > p^(1/2 + eps)``.

    Random systems use a generator seeded by q, so the corpus is fixed.
    """
    qm = as_modulus(q)
    out = []
    single = ResidueClassSystem.build(qm, {p: [0] for p in qm.primes})
    if _hypothesis_ok(single, eps):
        out.append(("singleton", single))
    if q % 2 == 1 and q > 1:
        sq = squares_system(qm)
        if _hypothesis_ok(sq, eps):
            out.append(("squares", sq))
        qr0 = ResidueClassSystem.build(qm, {p: quadratic_residues(p) for p in qm.primes})
        if _hypothesis_ok(qr0, eps):
            out.append(("qr0", qr0))
    rnd = random_system(qm, np.random.default_rng(q), 0.5, 0.5 + eps)
    if _hypothesis_ok(rnd, eps):
        out.append(("random", rnd))
    return out


def _omega_rows(label: str, system: ResidueClassSystem, hs: list, mem: int) -> list[dict]:
    system = weyl_constants(system)
    rows = []
    for h in hs:
        rep = thm41_check(system, h, mem)
        rows.append({"system": label, "q": system.modulus.q, "h": h,
                     "lhs": rep.extras["lhs"], "rhs": rep.bound_value, "ratio": rep.ratio})
    return rows


def run_omega_sets(params: dict, threads: int = 1) -> ExperimentResult:
    mem = _mem(params)
    spec = _h_spec(params, "log:8")
    res = ExperimentResult(OMEGA_COLUMNS)
    if params.get("system"):
        sys_ = ResidueClassSystem.load(params["system"])
        jobs = [("file", sys_)]
    else:
        if not any(params.get(k) for k in ("q", "q_family", "q_range")):
            params = {**params, "q_range": "2..2000"}
        eps = float(params.get("epsilon", EPSILON))
        jobs = [job for q in resolve_qs(params) for job in corpus_systems(q, eps)]
    for rows in ordered_map(lambda j: _omega_rows(j[0], j[1], h_values(spec, j[1].modulus.q), mem),
                            jobs, threads):
        for row in rows:
            res.rows.append(row)
            res.observe("omega_sets.thm41", "max", row["ratio"],
                        system=row["system"], q=row["q"], h=row["h"])
            if row["ratio"] > 1:
                res.failures.append(f"thm41 ratio {row['ratio']:.6g} > 1 at "
                                    f"{row['system']} q={row['q']} h={row['h']}")
    return res


# --------------------------------------------------------------------------
# corollary1

COROLLARY_COLUMNS = ("X", "q", "primes", "h", "statistic", "scale", "ratio")


def run_corollary1(params: dict, threads: int = 1) -> ExperimentResult:
    Xs = _ints(params, "X", [20, 50])
    h = params.get("h")
    h_arg = "grid" if h is None else parse_int_list(h, "h")
    mem = _mem(params)
    res = ExperimentResult(COROLLARY_COLUMNS)
    for out in ordered_map(lambda X: corollary1_experiment(X, h_arg, mem), Xs, threads):
        for row in out.rows:
            res.rows.append({"X": out.X, "q": out.q, "primes": "x".join(map(str, out.primes)),
                             "h": row.h, "statistic": row.statistic, "scale": row.scale,
                             "ratio": row.ratio})
        res.observe(f"corollary1.X{out.X}", "min", out.min_ratio, q=out.q)
    return res


RUNNERS: dict[str, Callable[[dict, int], ExperimentResult]] = {
    "verify-identities": run_verify_identities,
    "moments": run_moments,
    "gaps": run_gaps,
    "squares": run_squares,
    "omega-sets": run_omega_sets,
    "corollary1": run_corollary1,
    "bounds-sweep": run_bounds_sweep,
}


def run_experiment(name: str, params: dict, threads: int = 1) -> ExperimentResult:
    try:
        runner = RUNNERS[name]
    except KeyError:
        raise ConfigError("experiment", f"unknown experiment {name!r}") from None
    return runner(params, threads)
