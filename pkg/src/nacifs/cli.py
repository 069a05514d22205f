"""Command-line front end: JSON system documents in, CSV and JSON results out.

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 estimation failure. Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .conformal import load_system, validation_reports
from .jsonutil import json_safe
from .errors import (
    ConfigError,
    EstimationError,
    IncompatibleSystems,
    NacifsError,
    PerturbationInfeasible,
    ValidationFailure,
)

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_ESTIMATION = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str, kind: str = "ConfigError"):
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_CONFIG, message, "UsageError")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, EstimationError):
        return EXIT_ESTIMATION
    if isinstance(exc, (ValidationFailure, PerturbationInfeasible, IncompatibleSystems)):
        return EXIT_VALIDATION
    return EXIT_CONFIG


# -- output ------------------------------------------------------------------------

class Outputs:
    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.digests: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        (self.dir / name).write_bytes(data)
        self.digests[name] = hashlib.sha256(data).hexdigest()


def _system(path):
    return load_system(Path(path))


def _walker_cfg(args):
    from .harmonic.estimate import WalkerConfig

    return WalkerConfig(walkers=args.walkers, seed=args.seed, r_launch=args.r_launch, r_out=args.r_out,
                        eps_abs=args.eps_abs, max_steps=args.max_steps)


def _parse_measure(spec: str, system, args):
    from .symbolic import BernoulliMeasure, EstimatedMeasure, UniformMeasure

    if spec == "uniform":
        return UniformMeasure(system), {}
    if spec.startswith("bernoulli:"):
        try:
            probs = [[float(x) for x in grp.split(",")] for grp in spec[len("bernoulli:"):].split(";")]
        except ValueError:
            raise ConfigError(f"bad bernoulli probabilities {spec!r}") from None
        return BernoulliMeasure(probs, system=system), {}
    if spec == "harmonic":
        from .harmonic.estimate import estimate_direct

        depth = args.depth if args.depth is not None else args.nmax + 4
        est = estimate_direct(system, 0, depth, args.nmax, _walker_cfg(args), args.threads)
        return EstimatedMeasure(est), {"estimate": est.manifest()}
    raise ConfigError(f"unknown measure {spec!r}; use harmonic, uniform or bernoulli:<p,...>")


def _diam(kind: str, system, sample_depth: int):
    from .symbolic import DerivProxyDiameter, SampleImageDiameter

    if kind == "deriv":
        return DerivProxyDiameter(system)
    if kind == "sample":
        return SampleImageDiameter(system, sample_depth=sample_depth)
    raise ConfigError(f"unknown diameter functional {kind!r}")


# -- subcommands --------------------------------------------------------------------

def cmd_validate(args, out: Outputs) -> tuple[dict, int]:
    system = load_system(Path(args.system), validate=False)
    reports = validation_reports(system, args.horizon)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fields = ["degree_ok", "bc_ok", "osc_ok", "ac_ok", "deriv_min", "deriv_max", "bc_margin", "osc_margin", "ac_margin"]
    w.writerow(["generation", "ok"] + fields)
    failed = []
    for n, rep in reports:
        vals = [getattr(rep, f) for f in fields]
        w.writerow([n, int(rep.ok)] + [int(v) if isinstance(v, bool) else repr(float(v)) for v in vals])
        if not rep.ok:
            failed.append(n)
    out.write("validation.csv", buf.getvalue())
    info = {"generations": len(reports), "failed": failed, "all_pass": not failed, "system": system.to_dict()}
    print(json.dumps({"all_pass": not failed, "generations": len(reports), "failed": failed[:20]}))
    return info, EXIT_OK if not failed else EXIT_VALIDATION


def cmd_measure(args, out: Outputs):
    from .harmonic.estimate import estimate_direct

    system = _system(args.system)
    depth = args.depth if args.depth is not None else args.assign + 4
    est = estimate_direct(system, args.offset, depth, args.assign, _walker_cfg(args), args.threads)
    out.write("measure.csv", est.to_csv())
    return {"system": system.to_dict(), "estimate": est.manifest()}, EXIT_OK


def cmd_dims(args, out: Outputs):
    from .thermo import dimension_report

    system = _system(args.system)
    mu, extra = _parse_measure(args.measure, system, args)
    diam = _diam(args.diam, system, args.sample_depth)
    rep = dimension_report(mu, diam, range(args.nmin, args.nmax + 1), args.window)
    out.write("dims.csv", rep.to_csv())
    out.write("dims.json", rep.to_json() + "\n")
    return {"system": system.to_dict(), "summary": json.loads(rep.to_json()), **extra}, EXIT_OK


def cmd_asi(args, out: Outputs):
    from .symbolic import asi_report

    system = _system(args.system)
    ks = list(range(args.kmin, args.kmax + 1))
    extra = {}
    if args.functional == "harmonic":
        from .harmonic.estimate import asi_report_harmonic

        rep = asi_report_harmonic(system, ks, _walker_cfg(args), threads=args.threads)
    else:
        if args.functional in ("diam", "deriv", "sample"):
            nu = _diam("deriv" if args.functional == "diam" else args.functional, system, args.sample_depth)
        else:
            nu, extra = _parse_measure(args.functional, system, args)
        rep = asi_report(nu, ks, tail=1, sample_budget=args.samples, rng_seed=args.seed,
                         exhaustive=args.exhaustive)
    out.write("asi.csv", rep.to_csv())
    out.write("asi_fit.json", rep.fit_json() + "\n")
    return {"system": system.to_dict(), "fit": json.loads(rep.fit_json()), **extra}, EXIT_OK


def cmd_perturb(args, out: Outputs):
    from .perturb import continuity_experiment

    system = _system(args.system)
    try:
        eps = [float(x) for x in args.epsilons.split(",")]
    except ValueError:
        raise ConfigError(f"bad epsilons {args.epsilons!r}") from None
    table = continuity_experiment(system, eps, args.mode, _walker_cfg(args), seed=args.seed,
                                  assign_depth=args.assign, approx_depth=args.depth,
                                  omega_depth=args.omega_depth, diam_horizon=args.diam_horizon,
                                  sample_depth=args.sample_depth, window=args.window, threads=args.threads)
    out.write("continuity.csv", table.to_csv())
    out.write("continuity.json", table.to_json() + "\n")
    return {"system": system.to_dict(), "summary": json.loads(table.to_json())}, EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.manifest)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        man = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from None
    lines = [f"command   {man.get('command')}", f"version   {man.get('version')}",
             f"seed      {man.get('seed')}", f"threads   {man.get('threads')}",
             f"wall time {man.get('wall_time', math.nan):.3f} s", "outputs"]
    status = EXIT_OK
    for name, digest in sorted(man.get("outputs", {}).items()):
        f = path.parent / name
        if f.exists():
            ok = hashlib.sha256(f.read_bytes()).hexdigest() == digest
            mark = "ok" if ok else "DIGEST MISMATCH"
            if not ok:
                status = EXIT_VALIDATION
        else:
            mark = "missing"
            status = EXIT_VALIDATION
        lines.append(f"  {name:<20} {digest[:16]}  {mark}")
    result = man.get("result", {})
    for key in ("summary", "fit", "estimate"):
        if key in result:
            lines.append(key)
            for k, v in sorted(result[key].items()):
                if not isinstance(v, (dict, list)):
                    lines.append(f"  {k:<28} {v}")
    if "all_pass" in result:
        lines.append(f"validation all_pass={result['all_pass']} failed={result['failed'][:20]}")
    print("\n".join(lines))
    return status


# -- parser --------------------------------------------------------------------------

def _globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--threads", type=int, default=d(1), help="worker threads (results do not depend on it)")
    p.add_argument("--out-dir", default=d("."), help="directory for CSV/JSON outputs and the manifest")


def _walker_args(p, walkers=100_000):
    p.add_argument("--walkers", type=int, default=walkers)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r-launch", type=float, default=8.0)
    p.add_argument("--r-out", type=float, default=16.0)
    p.add_argument("--eps-abs", type=float, default=1e-3)
    p.add_argument("--max-steps", type=int, default=100_000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nacifs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nacifs {__version__}")
    _globals(parser, False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check every generation up to the horizon")
    p.add_argument("system")
    p.add_argument("--horizon", type=int, default=None)
    _globals(p, True)

    p = sub.add_parser("measure", help="direct harmonic measure estimate")
    p.add_argument("system")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--depth", type=int, default=None, help="disk approximation depth (default assign+4)")
    p.add_argument("--assign", type=int, default=1)
    _walker_args(p)
    _globals(p, True)

    p = sub.add_parser("dims", help="entropy / Lyapunov / dimension table")
    p.add_argument("system")
    p.add_argument("--measure", default="uniform", help="harmonic | uniform | bernoulli:p0,p1[;q0,q1...]")
    p.add_argument("--diam", default="deriv", choices=["deriv", "sample"])
    p.add_argument("--sample-depth", type=int, default=4)
    p.add_argument("--nmin", type=int, default=1)
    p.add_argument("--nmax", type=int, default=12)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--depth", type=int, default=None, help="approximation depth for harmonic (default nmax+4)")
    _walker_args(p)
    _globals(p, True)

    p = sub.add_parser("asi", help="sibling-invariance decay report")
    p.add_argument("system")
    p.add_argument("--functional", default="diam", help="diam | sample | harmonic | uniform | bernoulli:...")
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--sample-depth", type=int, default=4)
    p.add_argument("--nmax", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--depth", type=int, default=None, help=argparse.SUPPRESS)
    _walker_args(p)
    _globals(p, True)

    p = sub.add_parser("perturb", help="continuity experiment over perturbation sizes")
    p.add_argument("system")
    p.add_argument("--mode", default="translate_b", choices=["translate_b", "scale_a", "jiggle_c"])
    p.add_argument("--epsilons", default="0.1,0.05,0.01")
    p.add_argument("--assign", type=int, default=8)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--omega-depth", type=int, default=2)
    p.add_argument("--diam-horizon", type=int, default=5)
    p.add_argument("--sample-depth", type=int, default=4)
    p.add_argument("--window", type=int, default=3)
    _walker_args(p)
    _globals(p, True)

    p = sub.add_parser("report", help="summarize a run manifest and verify output digests")
    p.add_argument("manifest")
    _globals(p, True)
    return parser


COMMANDS = {"validate": cmd_validate, "measure": cmd_measure, "dims": cmd_dims, "asi": cmd_asi,
            "perturb": cmd_perturb}


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "report":
            return cmd_report(args)
        out = Outputs(Path(args.out_dir))
        t0 = time.perf_counter()
        result, code = COMMANDS[args.command](args, out)
        manifest = {
            "command": args.command,
            "argv": argv,
            "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("out_dir",)},
            "seed": getattr(args, "seed", None),
            "threads": args.threads,
            "version": __version__,
            "wall_time": time.perf_counter() - t0,
            "outputs": dict(out.digests),
            "result": result,
        }
        out.dir.mkdir(parents=True, exist_ok=True)
        (out.dir / "manifest.json").write_text(json.dumps(json_safe(manifest), indent=2, default=str) + "\n")
        if code == EXIT_VALIDATION:
            return _fail(code, "ValidationFailure", "one or more generations failed validation")
        return code
    except CliError as exc:
        return _fail(exc.code, exc.kind, str(exc))
    except (NacifsError, OSError) as exc:
        return _fail(_exit_code(exc), type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
