"""Analysis of logged task measures.

Completion time, hovered-sample counts, and cursor distance are heavily
right-tailed, so group means are computed on Box-Cox-transformed values and
back-transformed for reporting, with participant-clustered bootstrap
confidence intervals. Group comparisons use the Mann-Whitney U test (two
groups) and the Kruskal-Wallis H test (more than two), both with midranks
and tie corrections; the U test is exact (full null enumeration) for small
tie-free samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError, ParameterError

MEASURES = {"time": "completion_time", "hovered": "hovered_events", "distance": "distance"}
EXACT_MW_LIMIT = 12
LAMBDA_RANGE = (-2.0, 2.0)
LAMBDA_TOL = 1e-4
LAMBDA_SNAP = 1e-6
BOOTSTRAP_RESAMPLES = 2000


# ---------------------------------------------------------------------------
# Box-Cox transformation

@dataclass(frozen=True)
class BoxCoxModel:
    lam: float
    shift: float
    log_likelihood: float


def _boxcox_loglik(x: np.ndarray, lam: float, log_sum: float) -> float:
    y = _transform(x, lam)
    var = y.var()
    if var <= 0:
        return -np.inf
    return -0.5 * len(x) * math.log(var) + (lam - 1.0) * log_sum


def _transform(x: np.ndarray, lam: float) -> np.ndarray:
    if lam == 0.0:
        return np.log(x)
    return (x ** lam - 1.0) / lam


def boxcox_fit(values: Sequence[float]) -> BoxCoxModel:
    """Profile-likelihood lambda on [-2, 2] via golden-section search."""
    x = np.asarray(values, dtype=np.float64)
    if len(x) < 10:
        raise InsufficientDataError(f"Box-Cox fit needs n >= 10, got {len(x)}")
    if np.any(x < 0):
        raise DomainError("Box-Cox requires nonnegative values")
    shift = 0.0
    if np.any(x == 0):
        med = float(np.median(x))
        if med <= 0:
            raise DomainError("cannot shift: median is not positive")
        shift = 1e-6 * med
        x = x + shift
    if np.all(x == x[0]):
        return BoxCoxModel(lam=1.0, shift=shift, log_likelihood=0.0)

    log_sum = float(np.sum(np.log(x)))
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = LAMBDA_RANGE
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _boxcox_loglik(x, c, log_sum)
    fd = _boxcox_loglik(x, d, log_sum)
    while b - a > LAMBDA_TOL:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _boxcox_loglik(x, c, log_sum)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _boxcox_loglik(x, d, log_sum)
    lam = (a + b) / 2.0
    if abs(lam) < LAMBDA_SNAP:
        lam = 0.0
    return BoxCoxModel(lam=lam, shift=shift,
                       log_likelihood=_boxcox_loglik(x, lam, log_sum))


def boxcox_apply(model: BoxCoxModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64) + model.shift
    if np.any(x <= 0):
        raise DomainError("values must exceed -shift")
    return _transform(x, model.lam)


def boxcox_invert(model: BoxCoxModel, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if model.lam == 0.0:
        x = np.exp(y)
    else:
        base = model.lam * y + 1.0
        if np.any(base <= 0):
            raise DomainError("value outside the transform range")
        x = base ** (1.0 / model.lam)
    return x - model.shift


# ---------------------------------------------------------------------------
# Rank machinery

def midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _tie_term(values: np.ndarray) -> float:
    """Sum of t^3 - t over groups of tied values."""
    _, counts = np.unique(values, return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@lru_cache(maxsize=None)
def _exact_u_counts(n1: int, n2: int) -> tuple[int, ...]:
    """Null distribution counts of U over 0..n1*n2 (no ties).

    Recurrence on whether the largest pooled value belongs to the first
    group (adds n2 to U) or the second: N(u; m, n) = N(u-n; m-1, n) + N(u; m, n-1).
    """
    if n1 == 0 or n2 == 0:
        return (1,)
    out = [0] * (n1 * n2 + 1)
    for u, c in enumerate(_exact_u_counts(n1 - 1, n2)):
        out[u + n2] += c
    for u, c in enumerate(_exact_u_counts(n1, n2 - 1)):
        out[u] += c
    return tuple(out)


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test; returns (U of the first group, p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise ParameterError("both groups must be nonempty")
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    r1 = ranks[:n1].sum()
    u1 = r1 - n1 * (n1 + 1) / 2.0
    has_ties = len(np.unique(pooled)) < len(pooled)

    if n1 + n2 <= EXACT_MW_LIMIT and not has_ties:
        counts = np.asarray(_exact_u_counts(n1, n2), dtype=np.float64)
        total = counts.sum()
        center = n1 * n2 / 2.0
        dev = abs(u1 - center)
        us = np.arange(len(counts))
        p = counts[np.abs(us - center) >= dev - 1e-12].sum() / total
        return float(u1), float(min(1.0, p))

    mean = n1 * n2 / 2.0
    n = n1 + n2
    tie_adj = _tie_term(pooled) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_adj)
    if var <= 0:
        return float(u1), 1.0
    z = max(abs(u1 - mean) - 0.5, 0.0) / math.sqrt(var)
    return float(u1), float(min(1.0, 2.0 * _normal_sf(z)))


# ---------------------------------------------------------------------------
# Chi-square tail via the regularized upper incomplete gamma function

def _gamma_upper_regularized(s: float, x: float) -> float:
    if x < 0 or s <= 0:
        raise DomainError("need x >= 0 and s > 0")
    if x == 0:
        return 1.0
    if x < s + 1.0:
        # Lower series: P(s, x), return 1 - P.
        term = 1.0 / s
        total = term
        k = s
        for _ in range(500):
            k += 1.0
            term *= x / k
            total += term
            if abs(term) < abs(total) * 1e-15:
                break
        log_p = math.log(total) + s * math.log(x) - x - math.lgamma(s)
        return max(0.0, 1.0 - math.exp(log_p))
    # Continued fraction for Q(s, x) (Lentz's method).
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return math.exp(s * math.log(x) - x - math.lgamma(s)) * h


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1:
        raise ParameterError("df must be >= 1")
    if x <= 0:
        return 1.0
    return _gamma_upper_regularized(df / 2.0, x / 2.0)


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Kruskal-Wallis H with midranks and tie correction; chi-square p-value."""
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(arrays) < 2 or any(len(g) == 0 for g in arrays):
        raise ParameterError("need at least 2 nonempty groups")
    n_total = sum(len(g) for g in arrays)
    if n_total < 5:
        raise ParameterError("need at least 5 observations in total")
    pooled = np.concatenate(arrays)
    ranks = midranks(pooled)
    h = 0.0
    start = 0
    for g in arrays:
        r = ranks[start:start + len(g)]
        h += len(g) * (r.mean() - (n_total + 1) / 2.0) ** 2
        start += len(g)
    h *= 12.0 / (n_total * (n_total + 1))
    correction = 1.0 - _tie_term(pooled) / (n_total ** 3 - n_total)
    if correction <= 0:
        return 0.0, 1.0  # every observation tied
    h /= correction
    return float(h), float(chi2_sf(h, len(arrays) - 1))


# ---------------------------------------------------------------------------
# Grouped summaries over logged results

@dataclass(frozen=True)
class GroupSummary:
    group: tuple
    mean: float
    ci_low: float
    ci_high: float
    n: int


def measure_values(records: list[dict], measure: str) -> np.ndarray:
    if measure not in MEASURES:
        raise ParameterError(f"measure must be one of {sorted(MEASURES)}")
    field = MEASURES[measure]
    return np.asarray([r[field] for r in records], dtype=np.float64)


def analysis_records(records: list[dict]) -> list[dict]:
    """Completed, non-practice task records."""
    return [r for r in records
            if r.get("completed") and r.get("phase") != "practice"]


def group_summary(records: list[dict], measure: str,
                  grouping: tuple[str, ...] = ("placement_mode", "label_mode"),
                  seed: int = 0, min_group: int = 10,
                  resamples: int = BOOTSTRAP_RESAMPLES) -> list[GroupSummary]:
    """Back-transformed group means with participant-clustered bootstrap CIs."""
    records = analysis_records(records)
    if not records:
        raise InsufficientDataError("no analyzable records")
    values = measure_values(records, measure)
    model = boxcox_fit(values)
    transformed = boxcox_apply(model, values)

    groups: dict[tuple, list[int]] = {}
    for idx, r in enumerate(records):
        groups.setdefault(tuple(r.get(g) for g in grouping), []).append(idx)
    sparse = [g for g, idxs in groups.items() if len(idxs) < min_group]
    if sparse:
        raise InsufficientDataError(f"groups below {min_group} observations: {sparse}")

    rng = np.random.default_rng(seed)
    out = []
    for group_key in sorted(groups):
        idxs = groups[group_key]
        by_participant: dict[str, np.ndarray] = {}
        for i in idxs:
            by_participant.setdefault(records[i]["participant_id"], []).append(transformed[i])
        clusters = [np.asarray(v) for v in by_participant.values()]
        point = float(np.mean(transformed[idxs]))
        boot = np.empty(resamples)
        for r_i in range(resamples):
            drawn = rng.integers(0, len(clusters), size=len(clusters))
            vals = [clusters[c][rng.integers(0, len(clusters[c]), size=len(clusters[c]))]
                    for c in drawn]
            boot[r_i] = np.mean(np.concatenate(vals))
        lo, hi = np.percentile(boot, [2.5, 97.5])
        mean_bt = float(boxcox_invert(model, point))
        lo_bt = float(boxcox_invert(model, min(lo, point)))
        hi_bt = float(boxcox_invert(model, max(hi, point)))
        out.append(GroupSummary(group=group_key, mean=mean_bt, ci_low=lo_bt,
                                ci_high=hi_bt, n=len(idxs)))
    return out


def summary_table(records: list[dict], seed: int = 0,
                  min_group: int = 10) -> list[dict]:
    """The (measure x label x placement) grid of back-transformed means."""
    rows = []
    for measure in ("time", "hovered", "distance"):
        for s in group_summary(records, measure, seed=seed, min_group=min_group):
            placement, label = s.group
            rows.append({"measure": measure, "label_mode": label,
                         "placement_mode": placement, "mean": s.mean,
                         "ci_low": s.ci_low, "ci_high": s.ci_high, "n": s.n})
    return rows


def significance_report(records: list[dict], questionnaires: Optional[list[dict]] = None,
                        alpha: float = 0.05) -> dict:
    """Pairwise and omnibus tests mirroring the grouped-means table layout."""
    records = analysis_records(records)
    if not records:
        raise InsufficientDataError("no analyzable records")
    conditions = {(r["placement_mode"], r["label_mode"]) for r in records}
    if len(conditions) < 2:
        raise ParameterError("need at least 2 conditions to compare")
    rows = []
    for measure in ("time", "hovered", "distance"):
        labels = sorted({r["label_mode"] for r in records})
        placements = sorted({r["placement_mode"] for r in records})
        for label in labels:
            split = {p: [r for r in records
                         if r["label_mode"] == label and r["placement_mode"] == p]
                     for p in placements}
            present = [p for p in placements if split[p]]
            if len(present) == 2:
                va = measure_values(split[present[0]], measure)
                vb = measure_values(split[present[1]], measure)
                u, p_val = mann_whitney_u(va, vb)
                rows.append({"measure": measure, "comparison": "placement",
                             "label_mode": label, "groups": present,
                             "test": "mann-whitney-u", "statistic": u, "p": p_val,
                             "significant": bool(p_val < alpha)})
        for placement in placements:
            split = {l: [r for r in records
                         if r["placement_mode"] == placement and r["label_mode"] == l]
                     for l in labels}
            present = [l for l in labels if split[l]]
            if len(present) >= 2:
                groups = [measure_values(split[l], measure) for l in present]
                h, p_val = kruskal_wallis(groups)
                rows.append({"measure": measure, "comparison": "label",
                             "placement_mode": placement, "groups": present,
                             "test": "kruskal-wallis", "statistic": h, "p": p_val,
                             "significant": bool(p_val < alpha)})

    likert_rows = []
    if questionnaires:
        by_item: dict[str, dict[str, list[int]]] = {}
        for q in questionnaires:
            label = q.get("label_mode")
            if q.get("questionnaire") not in ("Q1", "Q2") or label is None:
                continue
            for item, value in q.get("answers", {}).items():
                if isinstance(value, int):
                    by_item.setdefault(item, {}).setdefault(label, []).append(value)
        for item in sorted(by_item):
            groups = {l: v for l, v in by_item[item].items() if v}
            if len(groups) < 2:
                continue
            names = sorted(groups)
            if len(names) == 2:
                stat, p_val = mann_whitney_u(groups[names[0]], groups[names[1]])
                test = "mann-whitney-u"
            else:
                try:
                    stat, p_val = kruskal_wallis([groups[n] for n in names])
                except ParameterError:
                    continue
                test = "kruskal-wallis"
            likert_rows.append({"item": item, "groups": names, "test": test,
                                "statistic": stat, "p": p_val,
                                "significant": bool(p_val < alpha)})
    return {"alpha": alpha, "measures": rows, "questionnaire_items": likert_rows}
