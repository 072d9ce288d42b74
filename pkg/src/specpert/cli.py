"""Command-line entry point: ``specpert <subcommand> [flags]``.

Subcommands
-----------
gen      sample a matrix from a model and write it with a ``.meta`` sidecar
eig      eigenpairs of a symmetric matrix
dist     aligned 2->inf distance between two eigenvector matrices
bounds   closed-form perturbation bounds for a model or a spectrum
cluster  spectral clustering with K-medians
hcd      hierarchical sign splitting
mc       Monte Carlo experiments

File formats
------------
dense CSV   one matrix row per line, comma separated, no header
edge list   lines ``i,j`` or ``i,j,w`` with 0-based indices, one line per
            unordered pair (``i <= j``); the matrix size comes from the
            ``.meta`` sidecar or ``--n``
config      ``key=value`` lines (``#`` starts a comment); keys are flag names
            without leading dashes, with ``-`` or ``_``; flags given on the
            command line override config values

Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
4 I/O error. Every run echoes its resolved configuration to standard error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import bounds as _bounds
from . import clustering as _cl
from . import mc as _mc
from . import metrics as _metrics
from . import models as _models
from ._io import fmt, write_rows
from .errors import InputError, NumericalError
from .linalg import ORDERINGS, eigh, select_window

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(InputError):
    """Bad combination of command-line options."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route through our exit-code mapping
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().rstrip()}")


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def read_kv(path: str | os.PathLike) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def meta_path(path: str | os.PathLike) -> Path:
    return Path(str(path) + ".meta")


def read_matrix(path: str, fmt_name: str = "auto", n: int | None = None) -> np.ndarray:
    """Load a dense CSV or an edge list (see module docstring)."""
    meta = meta_path(path)
    info = read_kv(meta) if meta.exists() else {}
    if fmt_name == "auto":
        fmt_name = info.get("format", "dense")
    if fmt_name == "dense":
        M = np.loadtxt(path, delimiter=",", ndmin=2)
        return M
    if fmt_name != "edges":
        raise InputError(f"unknown matrix format {fmt_name!r}")
    n = n if n is not None else int(info["n"]) if "n" in info else None
    if n is None:
        raise InputError("edge lists need --n or a .meta sidecar with n")
    E = np.loadtxt(path, delimiter=",", ndmin=2)
    M = np.zeros((n, n))
    if E.size:
        i, j = E[:, 0].astype(int), E[:, 1].astype(int)
        w = E[:, 2] if E.shape[1] > 2 else np.ones(i.shape[0])
        if np.any(i < 0) or np.any(j < 0) or np.any(i >= n) or np.any(j >= n):
            raise InputError("edge index out of range")
        M[i, j] = w
        M[j, i] = w
    return M


def write_matrix(path: str, M: np.ndarray, fmt_name: str = "dense") -> None:
    with open(path, "w", newline="") as fh:
        if fmt_name == "dense":
            write_rows(fh, None, M.tolist())
        elif fmt_name == "edges":
            i, j = np.nonzero(np.triu(M))
            rows = ([a, b] if M[a, b] == 1.0 else [a, b, M[a, b]]
                    for a, b in zip(i.tolist(), j.tolist()))
            write_rows(fh, None, rows)
        else:
            raise InputError(f"unknown matrix format {fmt_name!r}")


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).replace("/", ",").split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in str(text).split(","):
        a, b = item.split(":")
        out.append((float(a), float(b)))
    return out


def _tuples(text: str) -> list[tuple[float, ...]]:
    return [tuple(float(x) for x in item.split("/")) for item in str(text).split(",")]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {text!r}")


def _emit(args, rows, header=("key", "value")) -> None:
    """Write ``rows`` to ``--out`` when given, else to standard output."""
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            write_rows(fh, header, rows)
    else:
        write_rows(sys.stdout, header, rows)


def _truth_from_meta(path: str) -> np.ndarray | None:
    meta = meta_path(path)
    if not meta.exists():
        return None
    try:
        return _models.ModelSpec.from_mapping(read_kv(meta)).labels()
    except InputError:
        return None


def _read_labels(path: str) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=_has_header(path))
    return data[:, -1].astype(int)


def _has_header(path: str) -> int:
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(x) for x in first.split(",")]
        return 0
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# model construction from flags
# ---------------------------------------------------------------------------


def spec_from_args(args) -> _models.ModelSpec:
    model = args.model
    need = {"er": ("n", "p"), "sbm": ("sizes", "B"), "four": ("K", "m", "a", "b"),
            "btsbm": ("depth", "m", "probs"), "inhomogeneous": ("P",),
            "gaussian": ("mean", "std")}
    if model not in need:
        raise UsageError(f"--model must be one of {sorted(need)}")
    missing = [k for k in need[model] if getattr(args, k) is None]
    if missing:
        raise UsageError(f"--model {model} needs " + ", ".join(f"--{k}" for k in missing))
    if model == "er":
        return _models.ModelSpec.er(args.n, args.p)
    if model == "sbm":
        return _models.ModelSpec.sbm(_ints(args.sizes), _models._parse_mat(args.B), args.diag)
    if model == "four":
        n = args.K * args.m
        rho = args.rho if args.rho is not None else math.log(n) / n
        return _models.ModelSpec.four_parameter(args.K, args.m, args.a, args.b, rho, args.diag)
    if model == "btsbm":
        return _models.ModelSpec.btsbm(args.depth, args.m, _floats(args.probs), args.diag)
    if model == "inhomogeneous":
        return _models.ModelSpec.inhomogeneous(_models._parse_mat(args.P))
    return _models.ModelSpec.gaussian(_models._parse_mat(args.mean), _models._parse_mat(args.std))


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", help="er | sbm | four | btsbm | inhomogeneous | gaussian")
    g.add_argument("--n", type=int, help="number of nodes (er)")
    g.add_argument("--p", type=float, help="edge probability (er)")
    g.add_argument("--sizes", help="block sizes, e.g. 50,50 (sbm)")
    g.add_argument("--B", help="block matrix rows separated by ';' (sbm)")
    g.add_argument("--K", type=int, help="number of blocks (four)")
    g.add_argument("--m", type=int, help="nodes per block (four, btsbm)")
    g.add_argument("--a", type=float, help="within-block coefficient (four)")
    g.add_argument("--b", type=float, help="between-block coefficient (four)")
    g.add_argument("--rho", type=float, help="scale of B (four); default log(n)/n")
    g.add_argument("--depth", type=int, help="tree depth (btsbm)")
    g.add_argument("--probs", help="probabilities by tree distance, e.g. 0.5,0.1 (btsbm)")
    g.add_argument("--diag", default=None, choices=("zeroed", "kept"),
                   help="diagonal of the block expectation (default zeroed)")
    g.add_argument("--P", help="full probability matrix, rows separated by ';'")
    g.add_argument("--mean", help="mean matrix, rows separated by ';' (gaussian)")
    g.add_argument("--std", help="standard deviations, rows separated by ';' (gaussian)")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = spec_from_args(args)
    M = _models.sample(spec, args.seed)
    write_matrix(args.out, M, args.format)
    with open(meta_path(args.out), "w") as fh:
        for line in spec.to_lines() + [f"seed={args.seed}", f"format={args.format}"]:
            fh.write(line + "\n")
    return EXIT_OK


def cmd_eig(args) -> int:
    M = read_matrix(args.input, args.format, args.n)
    es = eigh(M, method=args.method)
    k = es.n if args.k is None else args.k
    win = select_window(es, args.ordering, args.s, k)
    _emit(args, ((i + 1, v) for i, v in enumerate(win.values)), header=("index", "value"))
    if args.vectors:
        write_matrix(args.vectors, win.vectors)
    return EXIT_OK


def _partition(text: str) -> tuple[tuple[int, int], ...]:
    """``a:b,c:d`` -> ``((a, b), (c, d))``: 0-based half-open column ranges."""
    out = []
    for item in str(text).split(","):
        start, stop = item.split(":")
        out.append((int(start), int(stop)))
    return tuple(out)


def cmd_dist(args) -> int:
    U = np.loadtxt(args.U, delimiter=",", ndmin=2)
    Us = np.loadtxt(args.Ustar, delimiter=",", ndmin=2)
    if args.mode == "sign-blockwise":
        if not args.partition:
            raise UsageError("--mode sign-blockwise needs --partition")
        a = _metrics.Alignment("sign-blockwise", _partition(args.partition))
    else:
        a = _metrics.Alignment(args.mode)
    value = fmt(_metrics.d2inf(U, Us, a))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(value + "\n")
    else:
        print(value)
    return EXIT_OK


def cmd_bounds(args) -> int:
    constants = _bounds.Constants().override(
        **dict(kv.split("=", 1) for kv in (args.constant or [])))
    if args.spectrum:
        spectrum = np.loadtxt(args.spectrum, delimiter=",", ndmin=1).ravel()
        missing = [f for f in ("pstar", "pbar_star", "mnorm_Ustar") if getattr(args, f) is None]
        if missing:
            raise UsageError("--spectrum needs " + ", ".join("--" + f.replace("_", "-") for f in missing))
        inputs = _bounds.BoundInputs(
            eigvals_star=spectrum, s=args.s, r=args.r, n=args.n or spectrum.size,
            pstar=args.pstar, pbar_star=args.pbar_star, pbar=args.pbar or 0.0,
            delta=args.delta, alpha=args.alpha, mnorm_Ustar=args.mnorm_Ustar,
            mnorm_Ubar_star=args.mnorm_Ubar_star if args.mnorm_Ubar_star is not None else math.inf,
            mnorm_Astar=args.mnorm_Astar if args.mnorm_Astar is not None else math.inf,
            maxnorm_Astar=args.maxnorm_Astar if args.maxnorm_Astar is not None else math.inf,
            psd=bool(args.psd), constants=constants)
        Ldiag = np.loadtxt(args.lstar_diag, delimiter=",", ndmin=1) if args.lstar_diag else None
    else:
        if args.spec:
            spec = _models.ModelSpec.from_mapping(read_kv(args.spec))
        elif args.model:
            spec = spec_from_args(args)
        else:
            raise UsageError("bounds needs --spec, --model or --spectrum")
        P = _models.expected_matrix(spec)
        inputs = _bounds.BoundInputs.from_probabilities(
            P, args.s, args.r, args.delta, args.alpha, args.operator, constants)
        Ldiag = _models.laplacian(P).diagonal()
    if args.operator == "laplacian":
        if Ldiag is None:
            raise UsageError("--operator laplacian with --spectrum needs --lstar-diag")
        rep = _bounds.binary_bound_laplacian(inputs, Ldiag)
    else:
        rep = _bounds.binary_bound_adjacency(inputs)
    _emit(args, rep.as_items())
    return EXIT_OK


def _truth_for(args) -> np.ndarray | None:
    if args.truth:
        return _read_labels(args.truth)
    return _truth_from_meta(args.input)


def _write_labels(path: str, labels: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        write_rows(fh, ("index", "label"), enumerate(labels.tolist()))


def _summary_line(truth, labels, strict=True) -> str:
    if truth is None:
        return "exact,,rate,"
    exact, rate = _cl.recovery_check(labels, truth, strict=strict)
    return f"exact,{fmt(exact)},rate,{fmt(rate)}"


def cmd_cluster(args) -> int:
    A = read_matrix(args.input, args.format, args.n)
    res = _cl.spectral_cluster(A, args.K, args.operator, seed=args.seed)
    if args.out:
        _write_labels(args.out, res.labels)
    else:
        write_rows(sys.stdout, ("index", "label"), enumerate(res.labels.tolist()))
    print(_summary_line(_truth_for(args), res.labels))
    return EXIT_OK


def cmd_hcd(args) -> int:
    A = read_matrix(args.input, args.format, args.n)
    tree = _cl.hcd_sign(A, stop=args.stop, K=args.K, depth=args.depth, threshold=args.threshold)
    labels = tree.labels()
    if args.out:
        _write_labels(args.out, labels)
    else:
        write_rows(sys.stdout, ("index", "label"), enumerate(labels.tolist()))
    print(_summary_line(_truth_for(args), labels, strict=False))
    print(tree.serialize())
    return EXIT_OK


def cmd_mc(args) -> int:
    exp = args.experiment
    common = dict(base_seed=args.seed, workers=args.workers, out=args.out)
    trials = args.trials
    if exp == "variance":
        res = _mc.run_variance(args.n or 800, _floats(args.p_grid or "0.05,0.1,0.2,0.4"),
                               trials, **common)
    elif exp == "tail":
        res = _mc.run_tail(args.n or 800, args.p if args.p is not None else 0.1, trials,
                           t_grid=_floats(args.t_grid or "0,0.5,1,1.5,2,2.5,3"), **common)
    elif exp == "phase":
        res = _mc.run_phase(args.n or 3000, _pairs(args.ab or "18:2,4.5:4"), trials,
                            operator=args.operator, **common)
    elif exp == "bound_ratio":
        res = _mc.run_bound_ratio(_ints(args.n_grid or "500,1000,2000,4000"), trials,
                                  c=args.c, delta=args.delta, alpha=args.alpha,
                                  constants=dict(kv.split("=", 1) for kv in (args.constant or [])),
                                  **common)
    else:
        res = _mc.run_btsbm(args.depth or 2, args.m or 400,
                            _tuples(args.a_grid or "40/20/5,20.2/20/5"), trials, **common)
    if not args.out:
        write_rows(sys.stdout, _mc.SUMMARY_HEADER, res.summary_rows())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specpert", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"specpert {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, helptext, func):
        p = sub.add_parser(name, help=helptext, description=helptext + "\n\n" + FORMATS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.set_defaults(func=func)
        return p

    p = add("gen", "Sample a matrix from a model.", cmd_gen)
    _add_model_flags(p)
    p.add_argument("--seed", type=int, help="random seed (default: $SPECPERT_SEED or 0)")
    p.add_argument("--format", choices=("dense", "edges"), help="output format (default dense)")
    p.add_argument("--out", help="output path; a .meta sidecar is written next to it")
    REQUIRED[p.prog] = ("model", "out")

    p = add("eig", "Eigenpairs of a symmetric matrix.", cmd_eig)
    p.add_argument("--in", dest="input", help="input matrix")
    p.add_argument("--format", choices=("auto", "dense", "edges"), help="input format (default auto)")
    p.add_argument("--n", type=int, help="matrix size for edge lists without a sidecar")
    p.add_argument("--ordering", choices=ORDERINGS, help="window ordering (default descending-value)")
    p.add_argument("--s", type=int, help="eigenpairs to skip (default 0)")
    p.add_argument("--k", type=int, help="eigenpairs to report (default all)")
    p.add_argument("--method", choices=("auto", "ql", "lapack"), help="solver (default auto)")
    p.add_argument("--vectors", help="write the eigenvectors to this dense CSV")
    p.add_argument("--out", help="output CSV (index,value); default stdout")
    REQUIRED[p.prog] = ("input",)

    p = add("dist", "Aligned 2->inf distance between two eigenvector matrices.", cmd_dist)
    p.add_argument("--U", help="dense CSV, n x r")
    p.add_argument("--Ustar", help="dense CSV, n x r")
    p.add_argument("--mode", choices=("sign-global", "sign-blockwise", "exact-r1"),
                   help="alignment (default sign-global)")
    p.add_argument("--partition", help="column ranges for sign-blockwise, 0-based half-open, "
                                       "e.g. 0:2,2:3")
    p.add_argument("--out", help="file for the single number; default stdout")
    REQUIRED[p.prog] = ("U", "Ustar")

    p = add("bounds", "Closed-form bounds as key,value CSV.", cmd_bounds)
    _add_model_flags(p)
    p.add_argument("--spec", help="model file in key=value form (e.g. a .meta sidecar)")
    p.add_argument("--spectrum", help="CSV with the full expected spectrum")
    p.add_argument("--delta", type=float, help="failure probability (default 0.05)")
    p.add_argument("--alpha", type=float, help="exponent in (0, 1) (default 0.5)")
    p.add_argument("--s", type=int, help="eigenvalues above the window (default 0)")
    p.add_argument("--r", type=int, help="window size (default 1)")
    p.add_argument("--operator", choices=("adjacency", "laplacian"), help="default adjacency")
    p.add_argument("--pstar", type=float, help="max entry of P (with --spectrum)")
    p.add_argument("--pbar-star", dest="pbar_star", type=float, help="max row mean of P")
    p.add_argument("--pbar", type=float, help="mean off-diagonal entry of P")
    p.add_argument("--mnorm-ustar", dest="mnorm_Ustar", type=float, help="2->inf norm of U*")
    p.add_argument("--mnorm-ubar-star", dest="mnorm_Ubar_star", type=float,
                   help="2->inf norm of the full nonzero eigenspace (default inf)")
    p.add_argument("--mnorm-astar", dest="mnorm_Astar", type=float, help="2->inf norm of A*")
    p.add_argument("--maxnorm-astar", dest="maxnorm_Astar", type=float, help="max entry of |A*|")
    p.add_argument("--psd", help="true if A* is positive semidefinite")
    p.add_argument("--lstar-diag", dest="lstar_diag", help="CSV with the diagonal of L*")
    p.add_argument("--constant", action="append", help="override a constant, e.g. condition=2")
    p.add_argument("--out", help="output CSV; default stdout")

    for name, helptext, func in (("cluster", "Spectral clustering with K-medians.", cmd_cluster),
                                 ("hcd", "Hierarchical sign splitting.", cmd_hcd)):
        p = add(name, helptext, func)
        p.add_argument("--in", dest="input", help="input matrix (dense CSV or edge list)")
        p.add_argument("--format", choices=("auto", "dense", "edges"), help="default auto")
        p.add_argument("--n", type=int, help="matrix size for edge lists without a sidecar")
        p.add_argument("--truth", help="labels CSV (index,label); default: from the .meta sidecar")
        p.add_argument("--out", help="labels CSV (index,label); default stdout")
        p.add_argument("--K", type=int, help="number of clusters / leaves")
        if name == "cluster":
            p.add_argument("--operator", choices=("adjacency", "laplacian"), help="default adjacency")
            p.add_argument("--seed", type=int, help="K-medians seed")
            REQUIRED[p.prog] = ("input", "K")
        else:
            p.add_argument("--stop", choices=("K", "depth", "threshold"), help="default K")
            p.add_argument("--depth", type=int, help="number of split levels (stop=depth)")
            p.add_argument("--threshold", type=float, help="|lambda2| cutoff (stop=threshold)")
            REQUIRED[p.prog] = ("input",)

    p = add("mc", "Monte Carlo experiments; writes per-trial and summary CSVs.", cmd_mc)
    p.add_argument("experiment", choices=sorted(_mc.EXPERIMENTS))
    p.add_argument("--trials", type=int, help="trials per cell (default 20)")
    p.add_argument("--seed", type=int, help="base seed (default: $SPECPERT_SEED or 0)")
    p.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    p.add_argument("--out", help="per-trial CSV; the summary goes to <stem>_summary.csv")
    p.add_argument("--n", type=int, help="matrix size (variance, tail, phase)")
    p.add_argument("--p", type=float, help="edge probability (tail)")
    p.add_argument("--p-grid", dest="p_grid", help="comma list of p (variance)")
    p.add_argument("--t-grid", dest="t_grid", help="comma list of t (tail)")
    p.add_argument("--ab", help="a:b pairs, e.g. 18:2,4.5:4 (phase)")
    p.add_argument("--operator", choices=("adjacency", "laplacian"), help="phase operator")
    p.add_argument("--n-grid", dest="n_grid", help="comma list of n (bound_ratio)")
    p.add_argument("--c", type=float, help="p = c log n / n (bound_ratio, default 10)")
    p.add_argument("--delta", type=float, help="failure probability (bound_ratio)")
    p.add_argument("--alpha", type=float, help="exponent (bound_ratio)")
    p.add_argument("--constant", action="append", help="override a bound constant")
    p.add_argument("--depth", type=int, help="tree depth (btsbm, default 2)")
    p.add_argument("--m", type=int, help="nodes per leaf cluster (btsbm, default 400)")
    p.add_argument("--a-grid", dest="a_grid", help="coefficient tuples, e.g. 40/20/5,20.2/20/5")
    return parser


FORMATS = """file formats:
  dense CSV   one matrix row per line, comma separated, no header
  edge list   lines i,j or i,j,w (0-based, i <= j); size from the .meta sidecar or --n
  labels      CSV with header index,label
  config      key=value lines; keys are flag names; command-line flags win"""

REQUIRED: dict[str, tuple[str, ...]] = {}
DEFAULTS = {
    "format": None, "diag": "zeroed", "ordering": "descending-value", "s": 0,
    "method": "auto", "mode": "sign-global", "delta": 0.05, "alpha": 0.5, "r": 1,
    "operator": "adjacency", "stop": "K", "trials": 20, "c": 10.0,
}
FORMAT_DEFAULT = {"gen": "dense"}


def _resolve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    """Merge config-file values under command-line flags, then apply defaults."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config", "func")}
    if args.config:
        for key, raw in read_kv(args.config).items():
            key = key.replace("-", "_")
            dest = key if key in actions else {a.lower(): a for a in actions}.get(key.lower())
            if dest is None:
                raise UsageError(f"unknown config key {key!r} for '{args.command}'")
            if getattr(args, dest) is None:
                act = actions[dest]
                value = act.type(raw) if act.type else raw
                if act.choices is not None and value not in act.choices:
                    raise UsageError(f"config {key}={raw} not in {sorted(act.choices)}")
                if isinstance(act, argparse._AppendAction):
                    value = [raw]
                setattr(args, dest, value)
    for key, value in DEFAULTS.items():
        if key in actions and getattr(args, key) is None:
            setattr(args, key, value)
    if "format" in actions and args.format is None:
        args.format = FORMAT_DEFAULT.get(args.command, "auto")
    if "seed" in actions and args.seed is None:
        args.seed = int(os.environ.get("SPECPERT_SEED", "0"))
    if "psd" in actions and args.psd is not None:
        args.psd = _bool(args.psd)
    missing = [k for k in REQUIRED.get(sub.prog, ()) if getattr(args, k) is None]
    if missing:
        raise UsageError(f"{sub.prog}: missing required "
                         + ", ".join("--" + ("in" if k == "input" else k) for k in missing)
                         + "\n" + sub.format_usage().rstrip())
    return args


def _echo(args) -> None:
    for key, value in sorted(vars(args).items()):
        if key == "func" or value is None:
            continue
        sys.stderr.write(f"# {key}={'' if value is None else value}\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        args = _resolve(parser, args)
        _echo(args)
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
