"""Subjective-score fitting and metric/subjective correlation.

Pairwise votes are reduced to a win matrix (an "indistinguishable" vote adds
half a win each way) and fitted with the Bradley-Terry model by the
minorization-maximization iteration. Metric scores are then compared with the
fitted subjective scores per region with Pearson (PLCC) and Spearman (SRCC)
correlation, and the per-region values are averaged into a mean column.
"""

import csv
import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.stats import rankdata
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import AlignmentError, CorrelationError, FittingError
from .reporting import dumps_csv, dumps_json

# ---------------------------------------------------------------- Bradley-Terry


def votes_to_tally(votes, items=None):
    """Build ``(items, wins)`` from ``(item_a, item_b, winner)`` triples.

    `winner` is ``"a"``, ``"b"`` or ``"tie"``. Items are ordered by first
    appearance unless `items` is given.
    """
    votes = list(votes)
    if items is None:
        items = []
        for a, b, _ in votes:
            for name in (a, b):
                if name not in items:
                    items.append(name)
    index = {name: i for i, name in enumerate(items)}
    wins = np.zeros((len(items), len(items)))
    for a, b, winner in votes:
        if a == b:
            raise ValueError(f"item {a!r} compared with itself")
        i, j = index[a], index[b]
        winner = winner.strip().lower()
        if winner == "a":
            wins[i, j] += 1
        elif winner == "b":
            wins[j, i] += 1
        elif winner == "tie":
            wins[i, j] += 0.5
            wins[j, i] += 0.5
        else:
            raise ValueError(f"winner must be 'a', 'b' or 'tie', got {winner!r}")
    return list(items), wins


def read_votes(path):
    """Read a votes CSV with columns ``item_a,item_b,winner`` and optional ``region``.

    Returns ``{region: (items, wins)}``; without a region column everything is
    filed under the region ``None``.
    """
    grouped = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"item_a", "item_b", "winner"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            region = row.get("region") or None
            grouped[region].append((row["item_a"].strip(), row["item_b"].strip(), row["winner"]))
    return {region: votes_to_tally(v) for region, v in grouped.items()}


def _check_tally(wins):
    wins = np.asarray(wins, dtype=np.float64)
    if wins.ndim != 2 or wins.shape[0] != wins.shape[1]:
        raise ValueError(f"wins must be a square matrix, got shape {wins.shape}")
    if np.any(wins < 0) or np.any(np.diag(wins) != 0):
        raise ValueError("wins must be non-negative with a zero diagonal")
    return wins


def log_likelihood(scores, wins):
    """Bradley-Terry log-likelihood ``sum w_ij log(p_i / (p_i + p_j))``."""
    p = np.asarray(scores, dtype=np.float64)
    wins = np.asarray(wins, dtype=np.float64)
    i, j = np.nonzero(wins)
    return float(np.sum(wins[i, j] * (np.log(p[i]) - np.log(p[i] + p[j]))))


def _components(comparisons, items):
    n, labels = connected_components(comparisons > 0, directed=False)
    groups = [[items[k] for k in np.flatnonzero(labels == c)] for c in range(n)]
    return groups


def _mm_fit(wins, tol, max_iter, smoothing, items):
    wins = _check_tally(wins)
    n = wins.shape[0]
    if n < 2:
        raise FittingError("need at least two items")
    items = list(items) if items is not None else list(range(n))
    comparisons = wins + wins.T
    groups = _components(comparisons, items)
    if len(groups) > 1:
        raise FittingError(f"comparison graph is disconnected: components {groups}")

    smoothed = False
    if smoothing is True or (smoothing == "auto" and np.any(wins.sum(axis=1) == 0)):
        if smoothing == "auto":
            zero = [items[k] for k in np.flatnonzero(wins.sum(axis=1) == 0)]
            warnings.warn(f"items without wins {zero}; adding 0.5 to every compared pair",
                          RuntimeWarning, stacklevel=3)
        wins = wins + 0.5 * (comparisons > 0)
        comparisons = wins + wins.T
        smoothed = True

    won = wins.sum(axis=1)
    p = np.full(n, 1.0 / n)
    history = [log_likelihood(p, wins)]
    for it in range(1, max_iter + 1):
        denom = (comparisons / (p[:, None] + p[None, :])).sum(axis=1)
        new = won / denom
        new /= new.sum()
        change = np.max(np.abs(new - p))
        p = new
        history.append(log_likelihood(p, wins))
        if change < tol:
            return p, history, it, smoothed
    raise FittingError(f"Bradley-Terry fit did not converge in {max_iter} iterations")


def fit_bradley_terry(wins, tol=1e-9, max_iter=10000, smoothing="auto"):
    """Maximum-likelihood Bradley-Terry strengths normalized to sum 1.

    ``wins[i][j]`` counts how often item i beat item j. With
    ``smoothing="auto"`` half a win is added in both directions of every
    compared pair when some item never won, which keeps the estimate finite.

    >>> fit_bradley_terry([[0, 3], [1, 0]]).round(6).tolist()
    [0.75, 0.25]
    """
    return _mm_fit(wins, tol, max_iter, smoothing, None)[0]


class BradleyTerry(BaseEstimator):
    """Bradley-Terry model with the estimator interface.

    ``fit(wins)`` sets ``scores_``, ``log_likelihood_history_`` (one entry per
    MM iteration, starting from the uniform guess), ``n_iter_`` and
    ``smoothed_``. ``predict_proba(i, j)`` gives the modeled probability that
    item i beats item j.
    """

    def __init__(self, tol=1e-9, max_iter=10000, smoothing="auto"):
        self.tol = tol
        self.max_iter = max_iter
        self.smoothing = smoothing

    def fit(self, X, y=None, items=None):
        scores, history, n_iter, smoothed = _mm_fit(
            X, self.tol, self.max_iter, self.smoothing, items)
        self.scores_ = scores
        self.log_likelihood_history_ = history
        self.n_iter_ = n_iter
        self.smoothed_ = smoothed
        self.items_ = list(items) if items is not None else list(range(len(scores)))
        return self

    def predict_proba(self, i, j):
        check_is_fitted(self, "scores_")
        p = self.scores_
        return p[i] / (p[i] + p[j])


# ---------------------------------------------------------------- correlation


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise CorrelationError(f"correlation needs at least 3 items, got {x.size}")
    return x, y


def plcc(x, y):
    """Pearson linear correlation coefficient."""
    x, y = _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc))
    sy = np.sqrt(np.dot(yc, yc))
    if sx == 0 or sy == 0:
        raise CorrelationError("correlation is undefined for a constant vector")
    return float(np.clip(np.dot(xc, yc) / (sx * sy), -1.0, 1.0))


def srcc(x, y):
    """Spearman rank correlation; ties get averaged ranks."""
    x, y = _check_pair(x, y)
    return plcc(rankdata(x), rankdata(y))


@dataclass(frozen=True)
class CorrelationReport:
    """``per_region[region][metric] = (plcc, srcc)`` plus the mean over regions."""

    regions: tuple
    metrics: tuple
    per_region: dict
    mean_row: dict

    def table(self, coefficient):
        """``{metric: [value per region..., mean]}`` for "plcc" or "srcc"."""
        k = {"plcc": 0, "srcc": 1}[coefficient]
        return {m: [self.per_region[r][m][k] for r in self.regions] + [self.mean_row[m][k]]
                for m in self.metrics}

    def to_dict(self):
        out = {"regions": list(self.regions), "metrics": list(self.metrics)}
        for coef in ("srcc", "plcc"):
            out[coef] = {m: dict(zip(list(self.regions) + ["mean"], vals))
                         for m, vals in self.table(coef).items()}
        return out

    def to_json(self):
        return dumps_json(self.to_dict())

    def to_csv(self):
        header = ["metric", "coefficient", *self.regions, "mean"]
        rows = []
        for coef in ("srcc", "plcc"):
            for m, vals in self.table(coef).items():
                rows.append([m, coef, *vals])
        return dumps_csv(header, rows)


def _align(region, metric, scores, subjective):
    missing_scores = [i for i in subjective if i not in scores]
    missing_subjective = [i for i in scores if i not in subjective]
    if missing_scores or missing_subjective:
        raise AlignmentError(
            f"region {region!r}, metric {metric!r}: items without metric score "
            f"{missing_scores}, items without subjective score {missing_subjective}")
    items = list(subjective)
    return (np.array([scores[i] for i in items], dtype=np.float64),
            np.array([subjective[i] for i in items], dtype=np.float64))


def build_correlation_report(metric_scores, subjective):
    """Correlate metric scores with subjective scores region by region.

    Parameters
    ----------
    metric_scores : dict
      ``{region: {metric: {item: value}}}``.
    subjective : dict
      ``{region: {item: score}}``.

    Region and metric order follow the order of `metric_scores`.
    """
    regions = tuple(metric_scores)
    missing = [r for r in regions if r not in subjective]
    if missing:
        raise AlignmentError(f"no subjective scores for regions {missing}")
    metrics = []
    for r in regions:
        for m in metric_scores[r]:
            if m not in metrics:
                metrics.append(m)
    per_region = {}
    for r in regions:
        absent = [m for m in metrics if m not in metric_scores[r]]
        if absent:
            raise AlignmentError(f"region {r!r} lacks scores for metrics {absent}")
        per_region[r] = {}
        for m in metrics:
            x, y = _align(r, m, metric_scores[r][m], subjective[r])
            per_region[r][m] = (plcc(x, y), srcc(x, y))
    mean_row = {m: (float(np.mean([per_region[r][m][0] for r in regions])),
                    float(np.mean([per_region[r][m][1] for r in regions])))
                for m in metrics}
    return CorrelationReport(regions, tuple(metrics), per_region, mean_row)


def read_metric_scores(path, into=None):
    """Read ``region,item,metric,value`` rows into ``{region: {metric: {item: value}}}``.

    Pass an existing nested dict as `into` to merge several files.
    """
    out = into if into is not None else {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"region", "item", "metric", "value"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            region, metric, item = row["region"].strip(), row["metric"].strip(), row["item"].strip()
            out.setdefault(region, {}).setdefault(metric, {})[item] = float(row["value"])
    return out


def read_subjective(path):
    """Read ``region,item,score`` rows into ``{region: {item: score}}``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"region", "item", "score"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.setdefault(row["region"].strip(), {})[row["item"].strip()] = float(row["score"])
    return out
