"""Command-line experiment runner.

Configs are plain text, one ``section.key = value`` per line; ``#`` starts a
comment. Every subcommand writes its artifacts plus ``manifest.json`` (the
resolved config and a sha256 per artifact) into the output directory, which
is taken from ``--output``, then ``$FRACOSGOOD_OUTPUT``, then ``output.dir``.

Exit codes: 0 success, 2 invalid input, 3 inconclusive or negative verdict.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .grid import ConsistencyError, Grid, InitialData, ResolutionError, export_csv
from .kernels import (
    KernelSet,
    kernel_Y,
    kernel_Z,
    lp_thresholds,
    mass,
    validate_lp_laws,
    y_mass_target,
)
from .osgood import OsgoodFunction, f_eval, f_tilde_eval, osgood_divergence_report
from .regimes import RegimeParams, classify_rows, write_verdicts
from .solver import (
    TRACE_COLUMNS,
    Nonlinearity,
    SolverConfig,
    TimeMesh,
    annulus_bound_check,
    blowup_probe,
    fixed_point_solve,
    global_study,
)
from .specfun import DomainError
from .symbol import SpectralMeasure, Symbol

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3
OUTPUT_ENV = "FRACOSGOOD_OUTPUT"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


SCHEMA: dict[str, dict] = {
    "params": {"alpha": float, "beta": float, "d": _int, "k": float, "q": float, "q_prime": float,
               "eps": float, "tau": float, "rho": float, "t": float},
    "measure": {"kind": str, "mass": float, "directions": _floats, "weights": _floats, "samples": _floats},
    "grid": {"n": _int, "L": float},
    "time": {"T": float, "steps": _int, "kind": str, "grading": str, "t_first": float, "scheme": str},
    "nonlinearity": {"kind": str, "phi0": float, "lam": float, "level": _int},
    "u0": {"kind": str, "tau": float, "R": float, "c": float, "sigma": float, "amplitude": float,
           "gamma": float, "core": float},
    "solver": {"tolerance": float, "max_iter": _int},
    "study": {"levels": _int, "first_thresholds": _int, "factor": float, "min_levels": _int, "control": _bool,
              "s_min": float, "s_max": float, "samples": _int, "blocks": _int, "phi_factors": _floats,
              "fit_lo": float, "fit_hi": float},
    "output": {"dir": str, "formats": str},
}

_REQUIRED = object()


class RunConfig:
    """Parsed ``section.key = value`` entries; records every value it hands out."""

    def __init__(self, entries: dict[str, str] | None = None):
        self.entries = dict(entries or {})
        self.resolved: dict[str, object] = {}

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        entries: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
            name, value = (s.strip() for s in line.split("=", 1))
            cls._check_name(name, f"{source}:{lineno}")
            if name in entries:
                raise ConfigError(f"{source}:{lineno}: duplicate key '{name}'")
            entries[name] = value
        return cls(entries)

    @staticmethod
    def _check_name(name: str, where: str) -> None:
        section, _, key = name.partition(".")
        if section not in SCHEMA:
            raise ConfigError(f"{where}: unknown section '{section}' in '{name}'")
        if key not in SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key '{name}'")

    def override(self, assignments) -> None:
        for item in assignments or []:
            if "=" not in item:
                raise ConfigError(f"--set expects section.key=value, got {item!r}")
            name, value = (s.strip() for s in item.split("=", 1))
            self._check_name(name, "--set")
            self.entries[name] = value

    def has(self, name: str) -> bool:
        return name in self.entries

    def get(self, name: str, default=_REQUIRED):
        section, _, key = name.partition(".")
        conv = SCHEMA[section][key]
        if name not in self.entries:
            if default is _REQUIRED:
                raise ConfigError(f"missing required field '{name}'")
            self.resolved[name] = default
            return default
        try:
            value = conv(self.entries[name])
        except ValueError as exc:
            raise ConfigError(f"field '{name}': {exc}") from None
        self.resolved[name] = value
        return value


# --------------------------------------------------------------------------
# building domain objects from a config
# --------------------------------------------------------------------------


def build_measure(cfg: RunConfig, d: int) -> SpectralMeasure:
    kind = cfg.get("measure.kind")
    if kind == "symmetric":
        if d != 1:
            raise ConfigError("measure.kind = symmetric needs params.d = 1")
        return SpectralMeasure.symmetric(cfg.get("measure.mass", 1.0))
    if kind == "uniform":
        return SpectralMeasure.uniform(d, cfg.get("measure.mass", 1.0))
    if kind == "atoms":
        return SpectralMeasure.atoms(d, cfg.get("measure.directions"), cfg.get("measure.weights"))
    if kind == "density":
        return SpectralMeasure.density(cfg.get("measure.samples"))
    raise ConfigError(f"field 'measure.kind': unknown kind {kind!r}")


def build_kernel(cfg: RunConfig) -> KernelSet:
    alpha = cfg.get("params.alpha")
    beta = cfg.get("params.beta")
    d = cfg.get("params.d")
    sym = Symbol(beta, build_measure(cfg, d))
    grid = Grid(d, cfg.get("grid.n"), cfg.get("grid.L"))
    return KernelSet(alpha, sym, grid)


def build_osgood(cfg: RunConfig) -> OsgoodFunction:
    return OsgoodFunction(cfg.get("params.k"), cfg.get("nonlinearity.phi0"))


def build_nonlinearity(cfg: RunConfig) -> Nonlinearity:
    kind = cfg.get("nonlinearity.kind")
    if kind == "zero":
        return Nonlinearity.zero()
    if kind == "power":
        return Nonlinearity.power(cfg.get("nonlinearity.lam"), cfg.get("params.k"))
    if kind == "osgood":
        return Nonlinearity.from_osgood(build_osgood(cfg))
    if kind == "truncated":
        return Nonlinearity.truncated(build_osgood(cfg), cfg.get("nonlinearity.level"))
    raise ConfigError(f"field 'nonlinearity.kind': unknown kind {kind!r}")


def build_u0(cfg: RunConfig) -> InitialData:
    kind = cfg.get("u0.kind")
    if kind == "singular":
        return InitialData.singular(cfg.get("u0.tau"), cfg.get("u0.R"))
    if kind == "constant":
        return InitialData.constant(cfg.get("u0.c"))
    if kind == "gaussian":
        return InitialData.gaussian(cfg.get("u0.sigma"), cfg.get("u0.amplitude", 1.0))
    if kind == "power_tail":
        return InitialData.power_tail(cfg.get("u0.gamma"), cfg.get("u0.core", 1.0), cfg.get("u0.amplitude", 1.0))
    raise ConfigError(f"field 'u0.kind': unknown kind {kind!r}")


def build_mesh(cfg: RunConfig, alpha: float) -> TimeMesh:
    T = cfg.get("time.T")
    N = cfg.get("time.steps")
    kind = cfg.get("time.kind", "graded")
    if kind == "geometric":
        return TimeMesh.geometric(T, N, cfg.get("time.t_first"))
    if kind != "graded":
        raise ConfigError(f"field 'time.kind': unknown kind {kind!r}")
    grading = cfg.get("time.grading", "2")
    if grading == "for_order":
        return TimeMesh.for_order(T, N, alpha)
    try:
        return TimeMesh.graded(T, N, float(grading))
    except ValueError:
        raise ConfigError(f"field 'time.grading': expected a number or 'for_order', got {grading!r}") from None


def build_solver_config(cfg: RunConfig, ks: KernelSet, nl: Nonlinearity) -> SolverConfig:
    u0 = build_u0(cfg)
    mesh = build_mesh(cfg, ks.alpha)
    return SolverConfig(
        ks, nl, u0, mesh,
        tolerance=cfg.get("solver.tolerance", 1e-10),
        max_iter=cfg.get("solver.max_iter", 200),
        q=cfg.get("params.q", 2.0),
        q_prime=cfg.get("params.q_prime", None),
        eps=cfg.get("params.eps", None),
        scheme=cfg.get("time.scheme", "linear"),
    )


# --------------------------------------------------------------------------
# artifact writing
# --------------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


class Artifacts:
    def __init__(self, out_dir: Path, formats: set[str]):
        self.dir = out_dir
        self.formats = formats
        self.files: list[Path] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, columns: list[str], rows) -> None:
        if "csv" not in self.formats:
            return
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_num(r[c]) if not isinstance(r[c], str) else r[c] for c in columns])
        self.files.append(path)

    def field(self, name: str, fld) -> None:
        if "csv" not in self.formats:
            return
        path = self.dir / name
        export_csv(fld, path)
        self.files.append(path)

    def json(self, name: str, obj) -> None:
        if "json" not in self.formats:
            return
        path = self.dir / name
        with open(path, "w") as fh:
            json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
        self.files.append(path)

    def manifest(self, subcommand: str, cfg: RunConfig, exit_code: int) -> Path:
        entries = []
        for p in self.files:
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            entries.append({"file": p.name, "sha256": digest, "bytes": p.stat().st_size})
        man = {
            "subcommand": subcommand,
            "version": __version__,
            "config": {k: cfg.resolved[k] for k in sorted(cfg.resolved)},
            "artifacts": entries,
            "exit_code": exit_code,
        }
        path = self.dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump(_jsonable(man), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def verdict_doc(verdict: str, evidence: list, policy: dict) -> dict:
    return {"verdict": verdict, "evidence": evidence, "policy": policy}


# --------------------------------------------------------------------------
# subcommands; each returns (exit code, artifacts written)
# --------------------------------------------------------------------------


def _kernel_rows(ks: KernelSet, times, slope_times) -> list[dict]:
    a, b, d = ks.alpha, ks.beta, ks.dim
    rows = []

    def row(check, kernel, t, p, value, target, err, tol):
        rows.append({"check": check, "kernel": kernel, "alpha": a, "beta": b, "d": d, "t": t, "p": p,
                     "value": value, "target": target, "error": err, "tol": tol, "passed": bool(err <= tol)})

    for t in times:
        mz = mass(kernel_Z(ks, t))
        row("mass", "Z", t, None, mz, 1.0, abs(mz - 1.0), 1e-6)
        my, ty = mass(kernel_Y(ks, t)), y_mass_target(a, t)
        row("mass", "Y", t, None, my, ty, abs(my - ty) / ty, 1e-6)
    t = 0.5
    kst = ks.on_grid(ks.grid.rescaled(t ** (a / b)))
    for name, fn, expo in (("Z", kernel_Z, -a * d / b), ("Y", kernel_Y, -a * d / b + a - 1.0)):
        ref = t**expo * fn(ks, 1.0).values
        err = float(np.max(np.abs(fn(kst, t).values - ref)) / np.max(np.abs(ref)))
        row("scaling", name, t, None, err, 0.0, err, 1e-6)
    k1, k2 = lp_thresholds(d, b)
    for name, kappa in (("Z", k1), ("Y", k2)):
        for p in (1.0, 2.0):
            if p >= kappa:
                continue
            rep = validate_lp_laws(ks, p, slope_times, name)
            row("lp_slope", name, None, p, rep.slope, rep.predicted, rep.error, 0.05)
    return rows


KERNEL_COLUMNS = ["check", "kernel", "alpha", "beta", "d", "t", "p", "value", "target", "error", "tol", "passed"]


def cmd_kernel_validate(cfg: RunConfig, args, art: Artifacts) -> int:
    times = (0.1, 0.5, 1.0)
    slope_times = np.geomspace(1e-2, 1.0, 7)
    if args.default_suite:
        rows = []
        grid = Grid(1, 1 << 17, 16000.0)
        for alpha in (0.3, 0.5, 0.8):
            for beta in (0.8, 1.0, 1.5):
                ks = KernelSet(alpha, Symbol(beta, SpectralMeasure.symmetric()), grid)
                rows.extend(r for r in _kernel_rows(ks, times, slope_times) if r["check"] != "lp_slope")
        ks = KernelSet(0.5, Symbol(1.0, SpectralMeasure.symmetric()), Grid(1, 1 << 16, 4000.0))
        rows.extend(r for r in _kernel_rows(ks, (), slope_times) if r["check"] == "lp_slope")
    else:
        rows = _kernel_rows(build_kernel(cfg), times, slope_times)
    art.csv("kernel_checks.csv", KERNEL_COLUMNS, rows)
    ok = all(r["passed"] for r in rows)
    failed = [r for r in rows if not r["passed"]]
    art.json("verdict.json", verdict_doc("pass" if ok else "fail", failed if failed else
                                         [{"checks": len(rows), "passed": len(rows)}],
                                         {"mass_tol": 1e-6, "scaling_tol": 1e-6, "slope_tol": 0.05}))
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_osgood_table(cfg: RunConfig, args, art: Artifacts) -> int:
    of = build_osgood(cfg)
    s_min = cfg.get("study.s_min", 1e-3)
    s_max = cfg.get("study.s_max", 1e6)
    samples = cfg.get("study.samples", 200)
    if not (0 < s_min < s_max):
        raise ConfigError("need 0 < study.s_min < study.s_max")
    s = [np.geomspace(s_min, s_max, samples)]
    i = 0
    while of.log_phi(i) <= math.log(s_max):
        s.append([of.phi(i), 0.5 * of.phi(i)])
        i += 1
    s = np.unique(np.concatenate(s))
    s = s[(s >= s_min) & (s <= s_max)]
    f, ft = f_eval(of, s), f_tilde_eval(of, s)
    art.csv("osgood_table.csv", ["s", "f", "f_tilde"], ({"s": a, "f": b, "f_tilde": c} for a, b, c in zip(s, f, ft)))
    blocks = osgood_divergence_report(of, cfg.get("study.blocks", 30))
    art.csv("osgood_blocks.csv", ["block", "integral", "partial_sum"],
            ({"block": j + 1, "integral": c, "partial_sum": p}
             for j, (c, p) in enumerate(zip(blocks.contributions, blocks.partial_sums))))
    return EXIT_OK


def _read_param_rows(path: str) -> list[RegimeParams]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"alpha", "beta", "d", "k"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ConfigError(f"{path}: needs columns alpha, beta, d, k (and optionally q)")
        extra = set(reader.fieldnames) - need - {"q"}
        if extra:
            raise ConfigError(f"{path}: unknown columns {sorted(extra)}")
        for lineno, r in enumerate(reader, 2):
            try:
                out.append(RegimeParams(r["alpha"], r["beta"], int(r["d"]), r["k"], r.get("q") or 1))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


def cmd_regime_classify(cfg: RunConfig, args, art: Artifacts) -> int:
    if args.input:
        params = _read_param_rows(args.input)
    else:
        params = [RegimeParams(cfg.get("params.alpha"), cfg.get("params.beta"), cfg.get("params.d"),
                               cfg.get("params.k"), cfg.get("params.q", 1.0))]
    rows = classify_rows(params)
    if "csv" in art.formats:
        path = art.dir / "verdicts.csv"
        write_verdicts(rows, path)
        art.files.append(path)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args, art: Artifacts) -> int:
    ks = build_kernel(cfg)
    scfg = build_solver_config(cfg, ks, build_nonlinearity(cfg))
    hist, trace = fixed_point_solve(scfg)
    art.csv("trace.csv", TRACE_COLUMNS, trace.records)
    if not trace.blow_up:
        art.field("final_field.csv", hist.field(scfg.time_mesh.N))
    if trace.blow_up:
        verdict = "blow-up"
    elif trace.converged:
        verdict = "converged"
    else:
        verdict = "not converged"
    evidence = [{"iterations": trace.iterations, "residual_curve": trace.residual_curve,
                 "blow_up_step": trace.blow_up_step, "blow_up_functional": trace.blow_up_functional}]
    art.json("verdict.json", verdict_doc(verdict, evidence,
                                         {"tolerance": scfg.tolerance, "max_iter": scfg.max_iter,
                                          "scheme": scfg.scheme}))
    return EXIT_OK if verdict == "converged" else EXIT_INCONCLUSIVE


def cmd_blowup_study(cfg: RunConfig, args, art: Artifacts) -> int:
    ks = build_kernel(cfg)
    of = build_osgood(cfg)
    common = dict(
        q=cfg.get("params.q"),
        eps=cfg.get("params.eps"),
        tau=cfg.get("params.tau", None),
        rho=cfg.get("params.rho", None),
        t=cfg.get("params.t", 1.0),
        levels=cfg.get("study.levels", 5),
        first_thresholds=cfg.get("study.first_thresholds", 2),
        factor=cfg.get("study.factor", 1.5),
        min_levels=cfg.get("study.min_levels", 4),
    )
    rep = blowup_probe(ks, of, **common)
    rows = [{"level": lv["level"], "n": lv["n"], "thresholds": lv["thresholds"],
             "log_functional": lv["log_functional"], "ratio": rep.ratios[i - 1] if i else None}
            for i, lv in enumerate(rep.levels)]
    art.csv("blowup_levels.csv", ["level", "n", "thresholds", "log_functional", "ratio"], rows)
    doc = rep.to_json()
    if cfg.get("study.control", True):
        common.update(tau=rep.tau, rho=rep.rho)
        ctl = blowup_probe(ks, None, **common)
        doc["evidence"].append({"control": ctl.to_json()})
    art.json("verdict.json", doc)
    return EXIT_INCONCLUSIVE if rep.verdict == "inconclusive" else EXIT_OK


def cmd_global_study(cfg: RunConfig, args, art: Artifacts) -> int:
    ks = build_kernel(cfg)
    of = build_osgood(cfg)
    scfg = build_solver_config(cfg, ks, Nonlinearity.from_osgood(of))
    window = None
    if cfg.has("study.fit_lo") or cfg.has("study.fit_hi"):
        window = (cfg.get("study.fit_lo"), cfg.get("study.fit_hi"))
    rep = global_study(scfg, of, fit_window=window)
    art.csv("trace.csv", TRACE_COLUMNS, rep.trace.records)
    if rep.max_contraction >= 1 or not rep.converged:
        verdict = "data not small enough"
    elif rep.supersolution.ok and rep.monotone_ok and rep.slope_error <= 0.1:
        verdict = "global evidence"
    else:
        verdict = "inconclusive"
    art.json("verdict.json", verdict_doc(verdict, [rep.to_json()],
                                         {"slope_tol": 0.1, "contraction_bound": 1.0,
                                          "supersolution_rel_tol": 1e-8}))
    return EXIT_OK if verdict == "global evidence" else EXIT_INCONCLUSIVE


def cmd_annulus_check(cfg: RunConfig, args, art: Artifacts) -> int:
    ks = build_kernel(cfg)
    data = build_u0(cfg)
    rho = cfg.get("params.rho")
    factors = tuple(cfg.get("study.phi_factors", [1.0, 2.0, 5.0]))
    rep = annulus_bound_check(ks, data, rho, phi_factors=factors)
    doc = rep.to_json()
    art.csv("annulus_checks.csv", ["phi", "t_bound", "worst_margin", "samples"], doc["checks"])
    art.json("verdict.json", verdict_doc("bound holds" if rep.passed else "bound violated", [doc],
                                         {"slack": rep.slack, "phi_factors": list(factors)}))
    return EXIT_OK if rep.passed else EXIT_INCONCLUSIVE


COMMANDS = {
    "kernel-validate": (cmd_kernel_validate, "mass, scaling and L_p slope checks for Z and Y"),
    "osgood-table": (cmd_osgood_table, "tabulate f^[k] and its lower envelope; block integrals"),
    "regime-classify": (cmd_regime_classify, "critical exponents and verdicts for parameter tuples"),
    "simulate": (cmd_simulate, "Picard solve of the mild equation; trace CSV and final field"),
    "blowup-study": (cmd_blowup_study, "refinement ladder for the first-iterate local mass"),
    "global-study": (cmd_global_study, "small-data run in the global-existence window"),
    "annulus-check": (cmd_annulus_check, "lower bound of S(t) u0 on the annulus region"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracosgood",
        description="Numerical experiments for time-fractional semilinear equations with Osgood sources.",
        epilog="Exit codes: 0 success, 2 invalid input, 3 inconclusive or negative verdict. "
               f"${OUTPUT_ENV} overrides output.dir.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("-c", "--config", help="config file with 'section.key = value' lines")
        p.add_argument("-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config entry (repeatable)")
        p.add_argument("-o", "--output", help="output directory (beats $%s and output.dir)" % OUTPUT_ENV)
        if name == "kernel-validate":
            p.add_argument("--default-suite", action="store_true",
                           help="run the built-in d = 1 suite and ignore kernel fields of the config")
        if name == "regime-classify":
            p.add_argument("-i", "--input", help="CSV with columns alpha,beta,d,k[,q]")
    return parser


def _output_dir(cfg: RunConfig, args) -> Path:
    if args.output:
        return Path(args.output)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(cfg.get("output.dir", "fracosgood-output"))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, _ = COMMANDS[args.command]
    try:
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            cfg = RunConfig.parse(text, args.config)
        else:
            cfg = RunConfig()
        cfg.override(args.set)
        formats = {f.strip() for f in cfg.get("output.formats", "csv,json").split(",") if f.strip()}
        if not formats <= {"csv", "json"}:
            raise ConfigError(f"field 'output.formats': unknown formats {sorted(formats - {'csv', 'json'})}")
        art = Artifacts(_output_dir(cfg, args), formats)
        code = func(cfg, args, art)
    except (ConfigError, DomainError, ResolutionError) as exc:
        print(f"fracosgood {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConsistencyError as exc:
        print(f"fracosgood {args.command}: numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    art.manifest(args.command, cfg, code)
    print(f"fracosgood {args.command}: wrote {len(art.files)} artifact(s) to {art.dir} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
