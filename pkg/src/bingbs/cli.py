"""Command-line entry point: ``bingbs <subcommand>``.

Exit codes: 0 ok, 1 internal failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import traceback
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .combinatorics import sample_size, verify_lemma_b, verify_lemma_c
from .config import MODES, SCHEMES, ExperimentConfig, load_config
from .encoding import encode, encoding_to_dict
from .features import (
    featurize,
    pca,
    pca_weights_csv,
    read_features,
    write_features,
)
from .graphio import DatasetFormatError, erdos_renyi, from_edges, load_tudataset, preprocess, read_graph
from .learn import double_cv
from .probability import binary_probability, verify_binary_pnr_identity
from .sampling import sample_binary

log = logging.getLogger("bingbs")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def blob_sha1(data: bytes) -> str:
    """Content hash in git's blob format."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def hash_inputs(path) -> dict:
    path = Path(path)
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    return {str(p): blob_sha1(p.read_bytes()) for p in files}


class Manifest:
    """Run record written to ``<out>/manifest.json`` whether or not the run succeeds."""

    def __init__(self, out_dir: Path, command: str, config: dict):
        self.path = Path(out_dir) / "manifest.json"
        self.doc = {"version": __version__, "command": command, "config": config, "inputs": {}, "stages": []}

    def add_inputs(self, path):
        self.doc["inputs"].update(hash_inputs(path))

    @contextmanager
    def stage(self, name: str):
        entry = {"name": name, "status": "running"}
        self.doc["stages"].append(entry)
        try:
            yield entry
        except BaseException as exc:
            entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            self.doc["failed_stage"] = name
            raise
        entry["status"] = "ok"

    def write(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.doc, indent=2, sort_keys=True) + "\n")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def _parse_pattern(text: str) -> list[int]:
    bits = text.replace(",", "").replace(" ", "")
    if not bits or set(bits) - {"0", "1"}:
        raise UsageError(f"pattern must be a string of 0/1, got {text!r}")
    return [int(c) for c in bits]


def _load_graph(source: str):
    """A graph file, or ``edge`` / ``K<m>`` / ``er:<M>:<p>:<seed>`` shorthands."""
    if source == "edge":
        return from_edges(2, [(0, 1)])
    if source.startswith("K") and source[1:].isdigit():
        m = int(source[1:])
        return from_edges(m, [(i, j) for i in range(m) for j in range(i + 1, m)])
    if source.startswith("er:"):
        _, M, p, seed = source.split(":")
        return erdos_renyi(int(M), float(p), int(seed))
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"graph file not found: {source}")
    try:
        return read_graph(path)
    except ValueError as exc:
        raise UsageError(f"{source}: {exc}") from exc


def cmd_probs(args) -> int:
    g = _load_graph(args.graph)
    b = _parse_pattern(args.pattern)
    if len(b) != g.num_vertices:
        raise UsageError(f"pattern has {len(b)} modes, graph has {g.num_vertices}")
    try:
        enc = encode(g, args.nbar)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"p({args.pattern}) = {binary_probability(enc, b)!r}")
    if args.pnr:
        chk = verify_binary_pnr_identity(enc, b, args.cutoff)
        print(f"pnr partial sum (cutoff {args.cutoff}, {chk.terms} terms) = {chk.partial_sum!r}")
        print(f"gap = {chk.gap!r}")
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        k: getattr(args, k, None)
        for k in ("dataset", "scheme", "mode", "nbar", "max_clicks", "S", "seed", "repeats", "folds", "out_dir")
    }
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = "auto" if args.gamma == "auto" else float(args.gamma)
    if getattr(args, "C_grid", None):
        overrides["C_grid"] = tuple(args.C_grid)
    try:
        return load_config(args.config, **overrides)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _run_features(cfg: ExperimentConfig, manifest: Manifest, dump_encoding: bool):
    out = Path(cfg.out_dir)
    with manifest.stage("load"):
        if not Path(cfg.dataset).is_dir():
            raise UsageError(f"dataset directory not found: {cfg.dataset}")
        manifest.add_inputs(cfg.dataset)
        ds = preprocess(load_tudataset(cfg.dataset), cfg.min_vertices, cfg.max_vertices)
        manifest.doc["dataset"] = ds.stats()
        (out / "label_map.json").write_text(json.dumps({str(k): v for k, v in ds.label_map.items()}) + "\n")
    if dump_encoding:
        with manifest.stage("encode"):
            encs = [encoding_to_dict(encode(g, cfg.nbar)) for g in ds.graphs if g.num_edges]
            (out / "encodings.json").write_text(json.dumps(encs) + "\n")
    with manifest.stage("featurize") as st:
        F = featurize(ds, cfg)
        path = write_features(F, out / f"features_{cfg.scheme}_{cfg.mode}.csv")
        st.update(rows=F.shape[0], skipped=list(F.skipped), file=str(path))
    return F, path


def cmd_features(args) -> int:
    cfg = _config_from_args(args)
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    manifest = Manifest(cfg.out_dir, "features", cfg.to_dict())
    try:
        F, path = _run_features(cfg, manifest, args.dump_encoding)
        print(f"wrote {path} ({F.shape[0]} rows x {F.shape[1]} features)")
    finally:
        manifest.write()
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _config_from_args(args)
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    manifest = Manifest(cfg.out_dir, "classify", cfg.to_dict())
    try:
        if args.features:
            if not Path(args.features).is_file():
                raise UsageError(f"feature file not found: {args.features}")
            manifest.add_inputs(args.features)
            F = read_features(args.features)
        else:
            F, _ = _run_features(cfg, manifest, False)
        with manifest.stage("classify"):
            report = double_cv(F.values, F.labels, cfg.C_grid, cfg.repeats, cfg.folds, cfg.seed, cfg.gamma, F.ids)
            (Path(cfg.out_dir) / "cv_report.json").write_text(report.to_json() + "\n")
        print(report.table())
    finally:
        manifest.write()
    return EXIT_OK


def cmd_pca(args) -> int:
    if not Path(args.features).is_file():
        raise UsageError(f"feature file not found: {args.features}")
    F = read_features(args.features)
    res = pca(F, args.k)
    text = pca_weights_csv(res, F.feature_names)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if res.degenerate:
        print("warning: zero-variance data, components are arbitrary", file=sys.stderr)
    return EXIT_OK


def cmd_samplesize(args) -> int:
    rows = [(o, e, d) for o in args.omega for e in args.epsilon for d in args.delta]
    try:
        values = [sample_size(o, e, d) for o, e, d in rows]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if len(rows) == 1:
        print(values[0])
        return EXIT_OK
    print(f"{'omega':>6} {'epsilon':>8} {'delta':>8} {'S':>10}")
    for (o, e, d), s in zip(rows, values):
        print(f"{o:>6} {e:>8g} {d:>8g} {s:>10}")
    return EXIT_OK


def cmd_sample(args) -> int:
    g = _load_graph(args.graph)
    enc = encode(g, args.nbar)
    batch = sample_binary(enc, args.S, args.seed, n_modes=args.n_modes)
    sys.stdout.write("\n".join(batch.lines()) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok = True

    def report(name, passed, detail=""):
        nonlocal ok
        ok &= bool(passed)
        print(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}".rstrip())

    b = verify_lemma_b(range(4, 65))
    report("weak-composition growth, M in [4, 64]", b.ok, f"({b.checked} checked)")
    for k in (2, 3, 4):
        c = verify_lemma_c(k, range(k, 10**4 + 1, 97))
        report(f"binomial ratio to 1/{k}!", c.ok)
    rng = np.random.default_rng(args.seed)
    for t in range(args.graphs):
        M = int(rng.integers(2, 6))
        g = erdos_renyi(M, 0.6, int(rng.integers(2**31)))
        if g.num_edges == 0:
            continue
        enc = encode(g, args.nbar)
        pattern = (rng.random(M) < 0.4).astype(int)
        gaps = [verify_binary_pnr_identity(enc, pattern, cut).gap for cut in (4, 8, 12, 16)]
        good = min(gaps) >= -1e-12 and all(x >= y - 1e-12 for x, y in zip(gaps, gaps[1:]))
        report(f"click/photon-number identity, graph {t} (M={M})", good, f"gap@16={gaps[-1]:.3g}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bingbs", description="Binary-detector GBS graph features and kernels.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("probs", help="click-pattern probability of a graph")
    sp.add_argument("graph", help="graph file (.json or matrix text), 'edge', 'K<m>' or 'er:M:p:seed'")
    sp.add_argument("pattern", help="0/1 string, one bit per mode")
    sp.add_argument("--nbar", type=float, default=5.0)
    sp.add_argument("--pnr", action="store_true", help="also print the photon-number partial sum")
    sp.add_argument("--cutoff", type=int, default=16)
    sp.set_defaults(func=cmd_probs)

    def experiment_args(sp):
        sp.add_argument("--config", help="key=value file with an [experiment] section")
        sp.add_argument("--dataset")
        sp.add_argument("--scheme", choices=SCHEMES)
        sp.add_argument("--mode", choices=MODES)
        sp.add_argument("--nbar", type=float)
        sp.add_argument("--max-clicks", dest="max_clicks", type=int)
        sp.add_argument("--samples", dest="S", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", dest="out_dir")

    sp = sub.add_parser("features", help="feature CSV for a dataset")
    experiment_args(sp)
    sp.add_argument("--dump-encoding", action="store_true")
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("classify", help="double cross-validation of the RBF SVM")
    experiment_args(sp)
    sp.add_argument("--features", help="existing feature CSV; featurizes the dataset otherwise")
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--folds", type=int)
    sp.add_argument("--gamma")
    sp.add_argument("--C-grid", dest="C_grid", type=float, nargs="+")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("pca", help="principal component weights of a feature CSV")
    sp.add_argument("features")
    sp.add_argument("-k", type=int, default=2)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_pca)

    sp = sub.add_parser("samplesize", help="samples for an L1 accuracy guarantee")
    sp.add_argument("omega", type=_int_list, help="outcome count(s), comma separated")
    sp.add_argument("epsilon", type=_float_list, nargs="?", default=[0.06])
    sp.add_argument("delta", type=_float_list, nargs="?", default=[0.01])
    sp.set_defaults(func=cmd_samplesize)

    sp = sub.add_parser("sample", help="draw click patterns, one 0/1 line per sample")
    sp.add_argument("graph")
    sp.add_argument("--S", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nbar", type=float, default=5.0)
    sp.add_argument("--n-modes", dest="n_modes", type=int)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("verify", help="run the counting-lemma and identity checks")
    sp.add_argument("--graphs", type=int, default=5)
    sp.add_argument("--nbar", type=float, default=0.2)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
