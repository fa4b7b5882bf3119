"""Command-line front end.

    rankpca test-eigvec --data X.csv --beta0 1,0,0 --method rank --score vdw
    rankpca test-eigval --data X.csv --p 0.3333 --q 1 --method rank --cv simulated
    rankpca are --score vdw --family t:5 --k 2
    rankpca simulate --config table2.cfg --threads 4
    rankpca critval --score vdw --problem eigval --k 3 --n 100 --reps 100000

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

import argparse
from dataclasses import dataclass, field
import json
import math
import sys
import warnings

import numpy as np

from . import __version__, eigtests, elliptic, mc, scores
from .errors import (ConfigError, DimensionError, NumericalError, ParseError, RankPCAError,
                     ValidationError)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
BETA0_TOL = 1e-6


@dataclass
class Dataset:
    X: np.ndarray
    names: list = field(default_factory=list)
    path: str = ""

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def ingest_csv(path):
    """Read a comma-separated numeric table with an optional header line.

    The first line is a header when any of its fields is non-numeric. Cells
    must be finite; ragged rows are rejected.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    rows, names, width = [], [], None
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        toks = [t.strip() for t in line.split(",")]
        if width is None and not names and not rows and not all(_is_number(t) for t in toks):
            names = toks
            width = len(toks)
            continue
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise DimensionError(f"{path}: line {lineno} has {len(toks)} fields, expected {width}")
        vals = []
        for col, tok in enumerate(toks, 1):
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {tok!r} at line {lineno}, column {col}",
                                 line=lineno, column=col) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: non-finite cell {tok!r} at line {lineno}, column {col}",
                                 line=lineno, column=col)
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise DimensionError(f"{path}: no data rows")
    X = np.array(rows)
    n, k = X.shape
    if k < 2:
        raise DimensionError(f"{path}: need at least 2 columns, got {k}")
    if n <= k:
        raise DimensionError(f"{path}: need more rows than columns, got n={n}, k={k}")
    return Dataset(X=X, names=names, path=str(path))


def parse_beta0(text, k):
    """Comma-separated beta0; normalized when within BETA0_TOL of unit norm."""
    try:
        b = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ParseError(f"bad --beta0 {text!r}; expected comma-separated numbers") from None
    if b.size != k:
        raise DimensionError(f"--beta0 has {b.size} entries but the data have k={k} columns")
    norm = float(np.linalg.norm(b))
    if not math.isfinite(norm) or abs(norm - 1.0) > BETA0_TOL:
        raise ConfigError(f"--beta0 must have unit norm (|beta0| = {norm!r})")
    return b / norm, norm != 1.0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj):
    # repr-based floats round-trip exactly; sort_keys keeps output stable
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(rep, notes, out):
    d = rep.to_dict()
    if notes:
        d["nuisance"]["notes"] = notes
    _emit(dumps(d), out)


def cmd_test_eigvec(a):
    data = ingest_csv(a.data)
    beta0, renorm = parse_beta0(a.beta0, data.k)
    K = scores.parse_score(a.score, data.k) if a.method == "rank" else None
    rep = eigtests.test_eigvec(data.X, beta0, a.method, K=K, alpha=a.alpha, kurtosis=a.kurtosis)
    notes = ["beta0 was renormalized to unit length"] if renorm else []
    _report(rep, notes, a.out)


def cmd_test_eigval(a):
    data = ingest_csv(a.data)
    K = scores.parse_score(a.score, data.k) if a.method == "rank" else None
    kw = {}
    if a.method == "rank":
        kw = dict(cv=a.cv, cv_reps=a.cv_reps, seed=a.seed, cv_method=a.cv_method)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = eigtests.test_eigval(data.X, a.p, a.q, a.method, K=K, alpha=a.alpha,
                                   kurtosis=a.kurtosis, **kw)
    notes = [str(w.message) for w in caught]
    for msg in notes:
        print(f"warning: {msg}", file=sys.stderr)
    _report(rep, notes, a.out)


def _split(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def cmd_are(a):
    ks = [int(t) for t in _split(a.k)]
    rows = []
    for k in ks:
        for sc in _split(a.score):
            for fam in _split(a.family):
                K = scores.parse_score(sc, k)
                g1 = elliptic.parse_family(fam, k)
                rows.append({"score": K.label, "family": g1.label, "k": k,
                             "are": scores.are_ratio(K, g1)})
    if a.format == "csv":
        lines = ["score,family,k,are"] + [f"{r['score']},{r['family']},{r['k']},{r['are']!r}"
                                          for r in rows]
        _emit("\n".join(lines) + "\n", a.out)
    else:
        _emit(dumps(rows[0] if len(rows) == 1 else {"rows": rows}), a.out)


def cmd_simulate(a):
    s = mc.load_config(a.config)
    if a.seed is not None:
        s = mc.Scenario(**(mc.asdict(s) | {"seed": a.seed}))
    threads = a.threads if a.threads is not None else mc.default_workers()
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    table = mc.run_scenario(s, workers=threads)
    _emit(table.to_csv() if a.format == "csv" else table.to_json(), a.out)


def cmd_critval(a):
    K = scores.parse_score(a.score, a.k)
    lam0 = np.array([float(t) for t in _split(a.lambda0)]) if a.lambda0 else None
    cv = mc.simulate_critical_value(K, a.problem, a.k, a.n, a.reps, alpha=a.alpha, seed=a.seed,
                                    lam0=lam0, p=a.p, q=a.q, method=a.method)
    _emit(dumps({"score": K.label, "problem": a.problem, "k": a.k, "n": a.n, "reps": a.reps,
                 "alpha": a.alpha, "seed": a.seed, "method": a.method,
                 "critical_value": cv}), a.out)


def _fraction(text):
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def build_parser():
    p = argparse.ArgumentParser(prog="rankpca", description="Tests for principal components "
                                "of elliptical shape matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json",)):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=fmt, default="json")

    sp = sub.add_parser("test-eigvec", help="test H0: first eigenvector = beta0")
    sp.add_argument("--data", required=True)
    sp.add_argument("--beta0", required=True, help="comma-separated unit vector")
    sp.add_argument("--method", choices=eigtests.EIGVEC_METHODS, default="rank")
    sp.add_argument("--score", default="vdw")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--kurtosis", choices=eigtests.KURTOSIS_MODES, default="moment")
    common(sp)
    sp.set_defaults(func=cmd_test_eigvec)

    sp = sub.add_parser("test-eigval", help="test H0: sum_{j>q} lambda_j = p tr(Lambda)")
    sp.add_argument("--data", required=True)
    sp.add_argument("--p", type=_fraction, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--method", choices=eigtests.EIGVAL_METHODS, default="rank")
    sp.add_argument("--score", default="vdw")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--kurtosis", choices=eigtests.KURTOSIS_MODES, default="moment")
    sp.add_argument("--cv", choices=mc.CV_MODES, default="asymptotic")
    sp.add_argument("--cv-reps", type=int, default=100_000)
    sp.add_argument("--cv-method", choices=mc.CV_METHODS, default="plugin")
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_test_eigval)

    sp = sub.add_parser("are", help="asymptotic relative efficiencies")
    sp.add_argument("--score", required=True, help="score spec(s), comma-separated")
    sp.add_argument("--family", required=True, help="family spec(s), comma-separated")
    sp.add_argument("--k", required=True, help="dimension(s), comma-separated")
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_are)

    sp = sub.add_parser("simulate", help="run a Monte-Carlo scenario")
    sp.add_argument("--config", required=True)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--seed", type=int, help="override the config seed")
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("critval", help="simulated critical value of a rank test")
    sp.add_argument("--score", required=True)
    sp.add_argument("--problem", choices=mc.PROBLEMS, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=100_000)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--method", choices=mc.CV_METHODS, default="plugin")
    sp.add_argument("--p", type=_fraction, default=1 / 3)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--lambda0", help="null spectrum, comma-separated (default: built-in)")
    common(sp)
    sp.set_defaults(func=cmd_critval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RankPCAError as exc:  # pragma: no cover - every error is one of the two above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
