"""Per-graph feature vectors from click statistics, CSV round trips and PCA.

Column order is fixed: mu features by click count ascending, nu features by the
5-bit pattern value with mode 1 as the most significant bit. ``nu_plus`` is
``nu`` without the vacuum column ``00000``.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .encoding import EncodingError, encode, vacuum_encoding
from .graphio import Dataset, Graph
from .linalg import sym_eig
from .probability import NU_MODES, exact_mu_distribution, exact_nu_distribution
from .sampling import empirical_distribution, sample_binary

log = logging.getLogger(__name__)

WORKERS_ENV = "BINGBS_WORKERS"


def feature_names(scheme: str, max_clicks: int = 6) -> list[str]:
    if scheme == "mu":
        return [f"clicks_{i}" for i in range(max_clicks + 1)]
    names = [f"p{k:0{NU_MODES}b}" for k in range(1 << NU_MODES)]
    if scheme == "nu":
        return names
    if scheme == "nu_plus":
        return names[1:]
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # (graphs, features)
    ids: np.ndarray
    labels: np.ndarray
    scheme: str
    feature_names: tuple
    dataset: str = ""
    mode: str = "exact"
    skipped: tuple = field(default=())

    def __post_init__(self):
        V = np.asarray(self.values, dtype=float)
        if V.ndim != 2 or V.shape[1] != len(self.feature_names):
            raise ValueError(f"values shape {V.shape} does not match {len(self.feature_names)} feature names")
        if len(self.ids) != V.shape[0] or len(self.labels) != V.shape[0]:
            raise ValueError("ids and labels need one entry per row")
        object.__setattr__(self, "values", V)
        object.__setattr__(self, "ids", np.asarray(self.ids, dtype=int))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def shape(self):
        return self.values.shape


def _encoding_for(g: Graph, nbar: float):
    if g.num_edges == 0:
        return vacuum_encoding(g.num_vertices, g.id)
    return encode(g, nbar)


def graph_features(g: Graph, cfg: ExperimentConfig) -> np.ndarray:
    """Feature vector of one graph under ``cfg`` (scheme, mode, nbar, S, seed)."""
    enc = _encoding_for(g, cfg.nbar)
    scheme = cfg.scheme
    if cfg.mode == "exact":
        if scheme == "mu":
            f = exact_mu_distribution(enc, min(cfg.max_clicks, enc.M), method="subsets")
        else:
            f = exact_nu_distribution(enc)
    else:
        seed = cfg.seed ^ g.id
        if scheme == "mu":
            batch = sample_binary(enc, cfg.samples, seed)
            f = empirical_distribution(batch, "mu", min(cfg.max_clicks, enc.M))
        else:
            if enc.M < NU_MODES:
                raise ValueError(f"nu features need at least {NU_MODES} modes, got {enc.M}")
            batch = sample_binary(enc, cfg.samples, seed, n_modes=NU_MODES)
            f = empirical_distribution(batch, "nu")
    if scheme == "mu" and f.size < cfg.max_clicks + 1:
        f = np.concatenate([f, np.zeros(cfg.max_clicks + 1 - f.size)])
    if scheme == "nu_plus":
        f = f[1:]
    return f


def _safe_features(args):
    g, cfg = args
    try:
        return graph_features(g, cfg), None
    except (ArithmeticError, ValueError, EncodingError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def featurize(ds: Dataset, cfg: ExperimentConfig) -> FeatureMatrix:
    """Feature matrix of a preprocessed dataset, rows in dataset order.

    Graphs whose featurization fails are skipped with a warning; their ids are
    kept in ``skipped``.
    """
    jobs = [(g, cfg) for g in ds.graphs]
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_safe_features, jobs, chunksize=4))
    else:
        results = [_safe_features(job) for job in jobs]

    rows, ids, labels, skipped = [], [], [], []
    for g, (f, err) in zip(ds.graphs, results):
        if f is None:
            skipped.append(g.id)
            log.debug("graph %d skipped: %s", g.id, err)
            continue
        rows.append(f)
        ids.append(g.id)
        labels.append(g.label)
    if skipped:
        warnings.warn(f"{len(skipped)} graph(s) skipped during featurization: {skipped}", RuntimeWarning)
    names = feature_names(cfg.scheme, cfg.max_clicks)
    values = np.array(rows) if rows else np.zeros((0, len(names)))
    return FeatureMatrix(
        values=values,
        ids=ids,
        labels=labels,
        scheme=cfg.scheme,
        feature_names=names,
        dataset=ds.name,
        mode=cfg.mode,
        skipped=tuple(skipped),
    )


def features_to_csv(F: FeatureMatrix) -> str:
    """CSV text: a ``#`` metadata line, a header, one row per graph.

    Floats use ``repr`` so equal matrices serialize to identical bytes.
    """
    buf = io.StringIO()
    buf.write(f"# scheme={F.scheme} mode={F.mode} dataset={F.dataset}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph_id", "label", *F.feature_names])
    for gid, lab, row in zip(F.ids.tolist(), F.labels.tolist(), F.values.tolist()):
        w.writerow([gid, lab, *(repr(float(x)) for x in row)])
    return buf.getvalue()


def write_features(F: FeatureMatrix, path) -> Path:
    path = Path(path)
    path.write_text(features_to_csv(F))
    return path


def read_features(path) -> FeatureMatrix:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing metadata line")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split() if "=" in tok)
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header[:2] != ["graph_id", "label"]:
        raise ValueError(f"{path}: header must start with graph_id,label")
    ids, labels, rows = [], [], []
    for rec in reader:
        if not rec:
            continue
        ids.append(int(rec[0]))
        labels.append(int(rec[1]))
        rows.append([float(x) for x in rec[2:]])
    names = header[2:]
    return FeatureMatrix(
        values=np.array(rows) if rows else np.zeros((0, len(names))),
        ids=ids,
        labels=labels,
        scheme=meta.get("scheme", ""),
        feature_names=names,
        dataset=meta.get("dataset", ""),
        mode=meta.get("mode", ""),
    )


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray  # (k, D), rows orthonormal
    explained_variance: np.ndarray  # (k,)
    mean: np.ndarray
    degenerate: bool = False


def pca(F, k: int) -> PcaResult:
    """Top-``k`` principal components of the sample covariance.

    Each component is flipped so its largest-magnitude weight is positive.
    ``degenerate`` is set when the data has no variance at all; the
    components are then an arbitrary orthonormal set.
    """
    X = np.asarray(F.values if isinstance(F, FeatureMatrix) else F, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("PCA needs at least 2 rows")
    D = X.shape[1]
    if not 1 <= k <= D:
        raise ValueError(f"k must lie in [1, {D}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    w, V = sym_eig(cov)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    comps = V[:, :k].T.copy()
    for row in comps:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    var = np.clip(w[:k], 0.0, None)
    degenerate = bool(np.all(w <= 0.0))
    if degenerate:
        var = np.zeros(k)
    return PcaResult(components=comps, explained_variance=var, mean=mean, degenerate=degenerate)


def pca_weights_csv(result: PcaResult, names) -> str:
    """Components x features table, one row per component."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "explained_variance", *names])
    for i, (row, var) in enumerate(zip(result.components.tolist(), result.explained_variance.tolist())):
        w.writerow([f"PC{i + 1}", repr(float(var)), *(repr(float(x)) for x in row)])
    return buf.getvalue()
