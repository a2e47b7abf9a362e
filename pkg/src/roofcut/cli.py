"""Command-line front end.

Subcommands::

    roofcut sweep     --family ghz-w --measure tau --pmin 0 --pmax 1 --steps 11 --out curve.csv
    roofcut point     --state rho.json --measure pi --witness-out witness.json
    roofcut reference --family werner --measure tau --steps 101
    roofcut classify  --family ghz-w --p 0.8

Exit codes: 0 success, 1 bad configuration or input file, 2 some run hit
the iteration cap, 3 numeric anomaly (an internal consistency failure or a
suspect oracle).  When several apply, 3 wins over 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .ccpa import (
    CONVERGED,
    ITERATION_CAP,
    ORACLE_SUSPECT,
    CcpaResult,
    OracleConfig,
    run,
    upper_bound_random_decomposition,
)
from .dual import build_instance
from .errors import InputError, InternalConsistencyError, LPError, MeasureNormalizationError
from .measures import get_measure
from .qlinalg import DensityMatrix, PureState
from .reference import analytic, normalize_family, state_ghz_w, state_werner

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_ANOMALY = 0, 1, 2, 3

CSV_COLUMNS = ("p", "measure", "numeric_lb", "analytic", "upper_bound", "iterations",
               "final_y", "termination", "runtime_seconds", "seed")

log = logging.getLogger("roofcut")


def fmt(v) -> str:
    """Floats with 12 significant digits; None as an empty field."""
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


@dataclass(frozen=True)
class RunConfig:
    measure: str
    eps: float = 1e-3
    family: str | None = None
    state: str | None = None
    pmin: float = 0.0
    pmax: float = 1.0
    steps: int = 11
    seed: int = 0
    max_iters: int | None = None
    starts: int | None = None
    upper_samples: int = 0
    timing: bool = True

    def __post_init__(self):
        get_measure(self.measure)
        if self.family is not None:
            object.__setattr__(self, "family", normalize_family(self.family))
        if not self.eps > 0:
            raise InputError("--eps must be positive")
        if self.steps < 1:
            raise InputError("--steps must be at least 1")
        if not 0.0 <= self.pmin <= self.pmax <= 1.0:
            raise InputError("need 0 <= pmin <= pmax <= 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise InputError("--max-iters must be positive")
        if self.starts is not None and self.starts < 1:
            raise InputError("--starts must be positive")
        if self.seed < 0 or self.upper_samples < 0:
            raise InputError("--seed and --upper-samples must be non-negative")

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.pmin])
        return np.linspace(self.pmin, self.pmax, self.steps)

    def oracle(self) -> OracleConfig:
        return OracleConfig(num_starts=self.starts, rng_seed=self.seed)


# --------------------------------------------------------------------------
# state files


def _complex_array(data, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{what}: entries must be [re, im] number pairs") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise InputError(f"{what}: entries must be [re, im] number pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def load_state(path: str) -> DensityMatrix:
    """Read ``{"dims", "matrix"}`` or ``{"dims", "vector"}`` JSON."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read state file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"state file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "dims" not in doc:
        raise InputError("state file needs a 'dims' field")
    dims = doc["dims"]
    if "matrix" in doc:
        m = _complex_array(doc["matrix"], "matrix")
        if m.ndim != 2:
            raise InputError("matrix must be a list of rows")
        return DensityMatrix(dims, m)
    if "vector" in doc:
        v = _complex_array(doc["vector"], "vector")
        if v.ndim != 1:
            raise InputError("vector must be a flat list of amplitudes")
        return PureState.normalized(dims, v).density()
    raise InputError("state file needs a 'matrix' or 'vector' field")


def dump_matrix(m: np.ndarray, dims) -> dict:
    return {"dims": list(dims),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def family_state(family: str, p: float) -> DensityMatrix:
    return state_ghz_w(p) if family == "ghz_w" else state_werner(p)


# --------------------------------------------------------------------------
# runs


def _solve(rho: DensityMatrix, measure: str, cfg: RunConfig) -> CcpaResult:
    inst = build_instance(rho, get_measure(measure))
    return run(inst, eps=cfg.eps, max_iters=cfg.max_iters, cfg=cfg.oracle())


def _exit_for(terminations) -> int:
    terms = set(terminations)
    if ORACLE_SUSPECT in terms:
        return EXIT_ANOMALY
    if ITERATION_CAP in terms:
        return EXIT_CAP
    return EXIT_OK


def _row(p, measure, res: CcpaResult, an, ub, cfg: RunConfig) -> list[str]:
    runtime = res.runtime_seconds if cfg.timing else None
    return [fmt(float(p)) if p is not None else "", measure, fmt(res.lower_bound), fmt(an),
            fmt(ub), fmt(res.iterations), fmt(res.final_y), res.termination,
            fmt(runtime), fmt(cfg.seed)]


def _write_csv(rows, out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from None


def cmd_sweep(cfg: RunConfig, out: str | None) -> int:
    if cfg.family is None:
        raise InputError("sweep needs --family")
    rows, terms = [], []
    for p in cfg.grid():
        rho = family_state(cfg.family, float(p))
        res = _solve(rho, cfg.measure, cfg)
        ub = (upper_bound_random_decomposition(rho, get_measure(cfg.measure),
                                               cfg.upper_samples, seed=cfg.seed)
              if cfg.upper_samples else None)
        an = analytic(cfg.family, cfg.measure, float(p))
        rows.append(_row(p, cfg.measure, res, an, ub, cfg))
        terms.append(res.termination)
        log.info("p=%.6g lb=%.6g termination=%s", p, res.lower_bound, res.termination)
    _write_csv(rows, out)
    return _exit_for(terms)


def _point_state(cfg: RunConfig, p: float | None) -> tuple[DensityMatrix, float | None]:
    if cfg.state is not None:
        return load_state(cfg.state), None
    if cfg.family is None or p is None:
        raise InputError("give --state, or --family together with --p")
    return family_state(cfg.family, p), p


def cmd_point(cfg: RunConfig, p: float | None, out: str | None,
              witness_out: str | None) -> int:
    rho, p = _point_state(cfg, p)
    res = _solve(rho, cfg.measure, cfg)
    an = analytic(cfg.family, cfg.measure, p) if p is not None else None
    print(f"measure            {cfg.measure}")
    print(f"lower bound        {fmt(res.lower_bound)}")
    print(f"termination        {res.termination}")
    print(f"iterations         {res.iterations}")
    print(f"final y            {fmt(res.final_y)}")
    print(f"witness objective  {fmt(res.witness_objective)}")
    if an is not None:
        print(f"analytic           {fmt(an)}")
    if witness_out:
        try:
            with open(witness_out, "w", encoding="utf-8") as fh:
                json.dump(dump_matrix(res.witness_matrix, rho.dims), fh)
        except OSError as exc:
            raise InputError(f"cannot write {witness_out}: {exc}") from None
    if out:
        _write_csv([_row(p, cfg.measure, res, an, None, cfg)], out)
    return _exit_for([res.termination])


def cmd_reference(cfg: RunConfig, out: str | None) -> int:
    if cfg.family is None:
        raise InputError("reference needs --family")
    rows = []
    for p in cfg.grid():
        value = analytic(cfg.family, cfg.measure, float(p))
        if value is None:
            raise InputError(f"no closed form for {cfg.measure} on the {cfg.family} family")
        rows.append((fmt(float(p)), cfg.measure, fmt(value)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("p", "measure", "analytic"))
    writer.writerows(rows)
    if out is None or out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from None
    return EXIT_OK


def classify(tau_lb: float, pi_lb: float, threshold: float) -> str:
    """Class label from certified lower bounds."""
    if tau_lb > threshold:
        return "GHZ\\W"
    if pi_lb > threshold:
        return "W\\B"
    return "B-compatible"


def cmd_classify(cfg: RunConfig, p: float | None, threshold: float | None) -> int:
    rho, p = _point_state(cfg, p)
    thr = 10.0 * cfg.eps if threshold is None else threshold
    tau = _solve(rho, "tau", cfg)
    terms = [tau.termination]
    pi_lb = 0.0
    if tau.lower_bound <= thr:
        pi = _solve(rho, "pi", cfg)
        pi_lb = pi.lower_bound
        terms.append(pi.termination)
    label = classify(tau.lower_bound, pi_lb, thr)
    print(label)
    log.info("tau_lb=%.6g pi_lb=%.6g threshold=%.3g", tau.lower_bound, pi_lb, thr)
    return _exit_for(terms)


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roofcut", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, measure_required=True):
        sp.add_argument("--family", help="ghz-w or werner")
        sp.add_argument("--measure", choices=("tau", "pi"), required=measure_required)
        sp.add_argument("--eps", type=float, default=1e-3)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iters", type=int, default=None)
        sp.add_argument("--starts", type=int, default=None,
                        help="random starts per oracle call (default depends on rank)")
        sp.add_argument("--out", default=None, help="CSV output path (default stdout)")

    sp = sub.add_parser("sweep", help="solve every point of a family grid")
    common(sp)
    sp.add_argument("--pmin", type=float, default=0.0)
    sp.add_argument("--pmax", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=11)
    sp.add_argument("--upper-samples", type=int, default=0,
                    help="random decompositions for the upper_bound column (0 = skip)")
    sp.add_argument("--no-timing", action="store_true",
                    help="leave runtime_seconds empty so output is byte-reproducible")

    sp = sub.add_parser("point", help="solve a single state")
    common(sp)
    sp.add_argument("--state", help="JSON state file")
    sp.add_argument("--p", type=float, default=None, help="family parameter (with --family)")
    sp.add_argument("--witness-out", default=None, help="write the witness matrix as JSON")

    sp = sub.add_parser("reference", help="emit a closed-form curve")
    sp.add_argument("--family", required=True)
    sp.add_argument("--measure", choices=("tau", "pi"), required=True)
    sp.add_argument("--pmin", type=float, default=0.0)
    sp.add_argument("--pmax", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=101)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("classify", help="label a state GHZ\\W, W\\B or B-compatible")
    common(sp, measure_required=False)
    sp.add_argument("--state", help="JSON state file")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--threshold", type=float, default=None, help="default 10*eps")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "reference":
            cfg = RunConfig(measure=args.measure, family=args.family, pmin=args.pmin,
                            pmax=args.pmax, steps=args.steps)
            return cmd_reference(cfg, args.out)
        cfg = RunConfig(
            measure=args.measure or "tau", eps=args.eps, family=args.family,
            state=getattr(args, "state", None), pmin=getattr(args, "pmin", 0.0),
            pmax=getattr(args, "pmax", 1.0), steps=getattr(args, "steps", 1),
            seed=args.seed, max_iters=args.max_iters, starts=args.starts,
            upper_samples=getattr(args, "upper_samples", 0),
            timing=not getattr(args, "no_timing", False))
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        if args.command == "point":
            return cmd_point(cfg, args.p, args.out, args.witness_out)
        return cmd_classify(cfg, args.p, args.threshold)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InternalConsistencyError, LPError, MeasureNormalizationError) as exc:
        print(f"numeric anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY


if __name__ == "__main__":
    sys.exit(main())
