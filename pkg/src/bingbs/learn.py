"""RBF kernel SVM trained by SMO, nested cross-validation, shortest-path kernel."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .graphio import Dataset

SMO_TOL = 1e-3
SMO_MAX_ITER = 100_000
TAU = 1e-12


class ConvergenceWarning(RuntimeWarning):
    pass


def auto_gamma(X) -> float:
    """``1 / (D * mean column variance)``; ``1 / D`` when every column is constant."""
    X = np.asarray(X, dtype=float)
    D = X.shape[1]
    var = float(np.mean(np.var(X, axis=0)))
    return 1.0 / (D * var) if var > 0 else 1.0 / D


def rbf_kernel(X, gamma="auto", Y=None) -> np.ndarray:
    """``exp(-gamma ||x - y||^2)`` between rows of ``X`` and rows of ``Y`` (default ``X``).

    ``gamma="auto"`` applies :func:`auto_gamma` to ``X``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("feature matrix must be 2-D and nonempty")
    Z = X if Y is None else np.asarray(Y, dtype=float)
    if np.isnan(X).any() or np.isnan(Z).any():
        raise ValueError("NaN in features")
    g = auto_gamma(X) if gamma == "auto" else float(gamma)
    if not g > 0 or not np.isfinite(g):
        raise ValueError(f"gamma must be positive and finite, got {gamma!r}")
    d2 = np.sum((X[:, None, :] - Z[None, :, :]) ** 2, axis=-1)
    return np.exp(-g * d2)


@dataclass
class BinarySvm:
    coef: np.ndarray  # alpha_i * y_i over training rows
    bias: float
    iterations: int
    converged: bool
    kkt_gap: float


@dataclass
class SvmModel:
    classes: np.ndarray
    C: float
    machines: list  # one BinarySvm per class (one-vs-rest) or a single one for two classes
    gamma: float | None = None

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int) -> BinarySvm:
    """Solve ``min 1/2 a'Qa - e'a`` s.t. ``0 <= a <= C``, ``y'a = 0`` with ``Q = yy' * K``.

    Working pair: ``i`` is the maximal KKT violator in the up set, ``j`` the
    low-set violator with the largest second-order decrease.
    """
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    gap = np.inf
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        minus_yG = -y * G
        if not up.any() or not low.any():
            gap = 0.0
            break
        vu = np.where(up, minus_yG, -np.inf)
        i = int(np.argmax(vu))
        m_up = vu[i]
        vl = np.where(low, minus_yG, np.inf)
        gap = m_up - float(np.min(vl))
        if gap < tol:
            break
        b = m_up - minus_yG
        cand = low & (b > 0)
        a = QD[i] + QD - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        it += 1

        Qi, Qj = Q[i], Q[j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = QD[i] + QD[j] + 2.0 * Qi[j]
            quad = quad if quad > 0 else TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * Qi[j]
            quad = quad if quad > 0 else TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        G += Qi * (alpha[i] - ai) + Qj * (alpha[j] - aj)

    converged = gap < tol
    # bias from free vectors, else midpoint of the feasible interval
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yG[free]))
    else:
        ub_mask = ((y > 0) & (alpha >= C)) | ((y < 0) & (alpha <= 0))
        lb_mask = ((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= C))
        ub = float(np.min(yG[lb_mask])) if lb_mask.any() else np.inf
        lb = float(np.max(yG[ub_mask])) if ub_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    return BinarySvm(coef=alpha * y, bias=-rho, iterations=it, converged=converged, kkt_gap=float(gap))


def svm_train(K, labels, C: float, tol: float = SMO_TOL, max_iter: int = SMO_MAX_ITER, gamma=None) -> SvmModel:
    """Train on a precomputed kernel. Two classes give one machine with the
    larger class id as the positive side; more classes train one-vs-rest."""
    K = np.asarray(K, dtype=float)
    labels = np.asarray(labels)
    if K.shape != (labels.size, labels.size):
        raise ValueError("kernel must be n x n for n labels")
    if not C > 0:
        raise ValueError("C must be positive")
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    targets = [classes[1]] if classes.size == 2 else list(classes)
    machines = []
    for cls in targets:
        y = np.where(labels == cls, 1.0, -1.0)
        m = _smo(K, y, C, tol, max_iter)
        if not m.converged:
            warnings.warn(
                f"SMO stopped after {m.iterations} iterations with KKT gap {m.kkt_gap:.3g}",
                ConvergenceWarning,
            )
        machines.append(m)
    return SvmModel(classes=classes, C=float(C), machines=machines, gamma=gamma)


def decision_function(model: SvmModel, K_rows) -> np.ndarray:
    K_rows = np.atleast_2d(np.asarray(K_rows, dtype=float))
    return np.stack([K_rows @ m.coef + m.bias for m in model.machines], axis=1)


def svm_predict(model: SvmModel, K_rows) -> np.ndarray:
    """Labels for test rows given their kernel values against the training rows.

    Ties go to the larger decision value, then to the lowest class id.
    """
    dec = decision_function(model, K_rows)
    if len(model.machines) == 1:
        return np.where(dec[:, 0] > 0, model.classes[1], model.classes[0])
    return model.classes[np.argmax(dec, axis=1)]


def assign_folds(ids, labels, folds: int, rng: np.random.Generator, stratified: bool = True) -> np.ndarray:
    """Fold index per row, dealt round-robin in a random order that depends on
    row ids only, so permuting rows leaves each id's fold unchanged."""
    ids = np.asarray(ids)
    labels = np.asarray(labels)
    n = ids.size
    if n < folds:
        raise ValueError(f"need at least {folds} samples, got {n}")
    if np.unique(ids).size != n:
        raise ValueError("row ids must be unique")
    by_id = np.argsort(ids, kind="stable")
    priority = np.empty(n)
    priority[by_id] = rng.random(n)
    out = np.empty(n, dtype=int)
    if stratified:
        _, counts = np.unique(labels, return_counts=True)
        if counts.min() < folds:
            warnings.warn("a class has fewer members than folds; using unstratified folds", RuntimeWarning)
            stratified = False
    groups = [np.flatnonzero(labels == c) for c in np.unique(labels)] if stratified else [np.arange(n)]
    offset = 0
    for rows in groups:
        order = rows[np.argsort(priority[rows], kind="stable")]
        out[order] = (offset + np.arange(order.size)) % folds
        offset += order.size
    return out


@dataclass
class CvReport:
    accuracies: list  # per repeat, percent
    mean: float
    std: float
    chosen_C: list  # [repeat][outer fold]
    fold_accuracies: list = field(default_factory=list)
    gamma: str | float = "auto"
    folds: int = 10
    repeats: int = 10
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def table(self) -> str:
        lines = ["repeat  accuracy(%)"]
        lines += [f"{r:>6}  {a:10.4f}" for r, a in enumerate(self.accuracies)]
        lines.append(f"mean    {self.mean:10.4f}")
        lines.append(f"std     {self.std:10.4f}")
        return "\n".join(lines)


def _accuracy(K, labels, train, test, C) -> float:
    model = svm_train(K[np.ix_(train, train)], labels[train], C)
    pred = svm_predict(model, K[np.ix_(test, train)])
    return float(np.mean(pred == labels[test]))


def double_cv(
    F,
    labels,
    C_grid,
    repeats: int = 10,
    folds: int = 10,
    seed: int = 0,
    gamma="auto",
    ids=None,
) -> CvReport:
    """Nested cross-validation of the RBF SVM.

    For every repeat the rows are split into ``folds`` stratified outer folds;
    on each outer training set an inner ``folds``-fold CV picks ``C`` (first
    best in grid order), the model is refit and scored on the held-out fold.
    ``gamma="auto"`` is computed from the outer training rows. Accuracies are
    percentages; ``std`` is the population standard deviation over repeats.
    """
    X = np.asarray(F, dtype=float)
    labels = np.asarray(labels)
    n = X.shape[0]
    ids = np.arange(n) if ids is None else np.asarray(ids)
    if labels.size != n or ids.size != n:
        raise ValueError("labels and ids need one entry per row")
    grid = [float(c) for c in C_grid]
    accs, chosen, per_fold = [], [], []
    for r in range(repeats):
        outer = assign_folds(ids, labels, folds, np.random.default_rng([seed, r]))
        fold_acc, fold_C = [], []
        for k in range(folds):
            train = np.flatnonzero(outer != k)
            test = np.flatnonzero(outer == k)
            g = auto_gamma(X[train]) if gamma == "auto" else float(gamma)
            K = rbf_kernel(X, g)
            inner = assign_folds(ids[train], labels[train], folds, np.random.default_rng([seed, r, k]))
            scores = []
            for C in grid:
                correct = 0
                for j in range(folds):
                    tr, te = train[inner != j], train[inner == j]
                    correct += _accuracy(K, labels, tr, te, C) * te.size
                scores.append(correct / train.size)
            best = grid[int(np.argmax(scores))]
            fold_C.append(best)
            fold_acc.append(100.0 * _accuracy(K, labels, train, test, best))
        accs.append(float(np.mean(fold_acc)))
        chosen.append(fold_C)
        per_fold.append(fold_acc)
    return CvReport(
        accuracies=accs,
        mean=float(np.mean(accs)),
        std=float(np.std(accs)),
        chosen_C=chosen,
        fold_accuracies=per_fold,
        gamma=gamma,
        folds=folds,
        repeats=repeats,
        seed=seed,
    )


def shortest_path_lengths(A) -> np.ndarray:
    """All-pairs hop distances by Floyd-Warshall; ``inf`` for unreachable pairs."""
    A = np.asarray(A)
    M = A.shape[0]
    D = np.where(A != 0, 1.0, np.inf)
    np.fill_diagonal(D, 0.0)
    for k in range(M):
        D = np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :])
    return D


def _histogram(D: np.ndarray, max_len: int) -> np.ndarray:
    d = D[np.triu_indices_from(D, k=1)]
    d = d[np.isfinite(d)].astype(int)
    return np.bincount(d, minlength=max_len + 1)[1 : max_len + 1].astype(float)


def sp_histogram(A, max_len: int | None = None) -> np.ndarray:
    """Counts of unordered reachable vertex pairs at each distance ``1..max_len``."""
    D = shortest_path_lengths(A)
    if max_len is None:
        max_len = int(np.max(D[np.isfinite(D)], initial=0))
    return _histogram(D, max_len)


def shortest_path_kernel(ds) -> np.ndarray:
    """Normalized dot products of shortest-path length histograms."""
    graphs = list(ds.graphs if isinstance(ds, Dataset) else ds)
    if not graphs:
        raise ValueError("empty dataset")
    dists = [shortest_path_lengths(g.adjacency if hasattr(g, "adjacency") else g) for g in graphs]
    L = max(1, max(int(np.max(D[np.isfinite(D)], initial=0)) for D in dists))
    H = np.stack([_histogram(D, L) for D in dists])
    K = H @ H.T
    norm = np.sqrt(np.diag(K))
    norm = np.where(norm > 0, norm, 1.0)
    return K / np.outer(norm, norm)
