"""Command-line interface.

Subcommands: ``simulate`` (seeded sweeps over the generating model),
``estimate`` (fit a CSV dataset), ``convert`` (strength conversions) and
``verify`` (invariant suite).  Delimited outputs get companion figures unless
``--no-figures`` is passed.  Exit codes: 0 ok, 2 input error, 3 numerical
error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dataio import (
    json_document,
    read_dataset_csv,
    write_json,
    write_records_csv,
)
from .errors import ConfspecWarning, InputError, InvalidInput, NumericalError
from .estimator import (
    DEFAULT_GRID_STEPS,
    DEFAULT_SIGMA_FACTOR,
    GridConfig,
    estimate_from_data,
    normalize_dataset,
)
from .simulate import simulation_sweep, summarize
from .transforms import beta_to_gamma, gamma_to_beta
from .verify import DEFAULT_SEED, run_verify

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

__all__ = ["RunConfig", "EXIT_OK", "EXIT_INPUT", "EXIT_NUMERIC", "EXIT_VERIFY",
           "build_parser", "main", "entrypoint"]


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; one instance fully determines a run's outputs."""

    command: str
    d: int = 0
    n: int = 0
    reps: int = 0
    seed: int = 0
    beta_steps: int = DEFAULT_GRID_STEPS
    eta_steps: int = DEFAULT_GRID_STEPS
    sigma_factor: float = DEFAULT_SIGMA_FACTOR
    normalize: bool = False
    input_path: str = ""
    output_path: str = ""
    target_column: str = ""
    drop: tuple[str, ...] = ()
    workers: int | None = None
    figures: bool = True
    size: str = "small"
    verify_seed: int = DEFAULT_SEED
    overrides: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.command in ("simulate",):
            for name in ("d", "n", "reps", "beta_steps", "eta_steps"):
                if getattr(self, name) < 1:
                    raise InvalidInput(f"{name} must be positive")
        if not self.sigma_factor > 0.0:
            raise InvalidInput("sigma-factor must be positive")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confspec",
        description="Estimate the strength of one-dimensional confounding "
                    "from the spectral measure of the regression vector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="seeded sweep over the generating model")
    sim.add_argument("--d", type=int, required=True, help="predictor dimension")
    sim.add_argument("--n", type=int, required=True, help="samples per replication")
    sim.add_argument("--reps", type=int, required=True, help="number of replications")
    sim.add_argument("--seed", type=int, default=0, help="root seed")
    sim.add_argument("--beta-steps", type=int, default=DEFAULT_GRID_STEPS)
    sim.add_argument("--eta-steps", type=int, default=DEFAULT_GRID_STEPS)
    sim.add_argument("--sigma-factor", type=float, default=DEFAULT_SIGMA_FACTOR)
    sim.add_argument("--workers", type=int, default=None,
                     help="worker threads (default: CONFSPEC_THREADS or logical cores)")
    sim.add_argument("--out", required=True, help="records CSV path; summary and "
                     "figure are written alongside")
    sim.add_argument("--no-figures", action="store_true")

    est = sub.add_parser("estimate", help="estimate confounding strength from a CSV")
    est.add_argument("--input", required=True, help="CSV with one header row")
    est.add_argument("--target", required=True, help="target column name or 0-based index")
    est.add_argument("--drop", action="append", default=[],
                     help="predictor column to exclude (repeatable)")
    est.add_argument("--normalize", action="store_true",
                     help="rescale predictors to unit variance first")
    est.add_argument("--sigma-factor", type=float, default=DEFAULT_SIGMA_FACTOR)
    est.add_argument("--beta-steps", type=int, default=DEFAULT_GRID_STEPS)
    est.add_argument("--eta-steps", type=int, default=DEFAULT_GRID_STEPS)
    est.add_argument("--out", default="", help="result JSON path (default: stdout); "
                     "a spectrum figure is written alongside")
    est.add_argument("--no-figures", action="store_true")

    conv = sub.add_parser("convert", help="convert between the two strength notions")
    group = conv.add_mutually_exclusive_group(required=True)
    group.add_argument("--gamma", type=float, help="correlative strength to convert")
    group.add_argument("--beta", type=float, help="structural strength to convert")
    conv.add_argument("--m1", type=float, required=True, help="first inverse moment")
    conv.add_argument("--m2", type=float, required=True, help="second inverse moment")
    conv.add_argument("--sxy2", type=float, required=True, help="squared norm of sigma_xy")
    conv.add_argument("--ahat2", type=float, required=True,
                      help="squared norm of the regression vector")
    conv.add_argument("--roundtrip", action="store_true",
                      help="convert back and echo the input")

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--size", choices=("small", "full"), default="small")
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--override", action="append", default=[], metavar="NAME=TOL",
                     help="override a check threshold (repeatable)")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "simulate":
        return RunConfig(command="simulate", d=args.d, n=args.n, reps=args.reps,
                         seed=args.seed, beta_steps=args.beta_steps,
                         eta_steps=args.eta_steps, sigma_factor=args.sigma_factor,
                         workers=args.workers, output_path=args.out,
                         figures=not args.no_figures)
    if args.command == "estimate":
        return RunConfig(command="estimate", input_path=args.input,
                         target_column=args.target, drop=tuple(args.drop),
                         normalize=args.normalize, sigma_factor=args.sigma_factor,
                         beta_steps=args.beta_steps, eta_steps=args.eta_steps,
                         output_path=args.out, figures=not args.no_figures)
    if args.command == "verify":
        overrides = []
        for item in args.override:
            name, sep, value = item.partition("=")
            if not sep:
                raise InvalidInput(f"override must look like name=tolerance, got {item!r}")
            try:
                overrides.append((name, float(value)))
            except ValueError:
                raise InvalidInput(f"bad tolerance in override {item!r}") from None
        return RunConfig(command="verify", size=args.size, verify_seed=args.seed,
                         overrides=tuple(overrides))
    return RunConfig(command="convert")


def _grid(cfg: RunConfig) -> GridConfig:
    return GridConfig(beta_steps=cfg.beta_steps, eta_steps=cfg.eta_steps,
                      sigma_factor=cfg.sigma_factor)


def run_simulate(cfg: RunConfig) -> int:
    records = simulation_sweep(cfg.d, cfg.n, cfg.reps, cfg.seed,
                               grid=_grid(cfg), workers=cfg.workers)
    out = Path(cfg.output_path)
    write_records_csv(records, out)
    summary = summarize(records, cfg.seed)
    summary["config"] = {
        "command": "simulate", "d": cfg.d, "n": cfg.n, "reps": cfg.reps,
        "seed": cfg.seed, "beta_steps": cfg.beta_steps, "eta_steps": cfg.eta_steps,
        "sigma_factor": cfg.sigma_factor,
    }
    write_json(summary, out.with_name(out.stem + "_summary.json"))
    if cfg.figures:
        from .figures import save_simulation_figure

        save_simulation_figure(records, out.with_name(out.stem + "_scatter.png"))
    sys.stdout.write(json_document(summary))
    return EXIT_OK


def run_estimate(cfg: RunConfig) -> int:
    ds, feature_names, target_name = read_dataset_csv(
        cfg.input_path, cfg.target_column, cfg.drop)
    if ds.dim < 2:
        raise InvalidInput("estimation needs at least two predictor columns")
    if ds.n_samples < 2:
        raise InvalidInput("estimation needs at least two data rows")
    caught: list[str] = []
    with warnings.catch_warnings(record=True) as grabbed:
        warnings.simplefilter("always", ConfspecWarning)
        if cfg.normalize:
            ds = normalize_dataset(ds)
        result = estimate_from_data(ds, _grid(cfg))
        caught = [str(w.message) for w in grabbed if issubclass(w.category, ConfspecWarning)]
    doc = {
        "beta_hat": result.beta_hat,
        "eta_hat": result.eta_hat,
        "eta_unreliable": not result.eta_reliability_flag,
        "distance": result.distance,
        "a_hat_norm_sq": result.a_hat_norm_sq,
        "eigenvalues": list(result.eigenvalues),
        "observed_weights": list(result.observed_weights),
        "fitted_weights": list(result.fitted_weights),
        "features": feature_names,
        "target": target_name,
        "warnings": caught,
        "config": {
            "command": "estimate", "input": cfg.input_path, "target": cfg.target_column,
            "drop": list(cfg.drop), "normalize": cfg.normalize,
            "sigma_factor": cfg.sigma_factor, "beta_steps": cfg.beta_steps,
            "eta_steps": cfg.eta_steps,
        },
    }
    if cfg.output_path:
        out = Path(cfg.output_path)
        write_json(doc, out)
        if cfg.figures:
            from .figures import save_estimate_figure

            save_estimate_figure(result, out.with_name(out.stem + "_spectrum.png"),
                                 title=f"target: {target_name}")
    else:
        sys.stdout.write(json_document(doc))
    return EXIT_OK


def run_convert(args: argparse.Namespace) -> int:
    kwargs = dict(m_minus1=args.m1, m_minus2=args.m2,
                  norm_sxy_sq=args.sxy2, norm_ahat_sq=args.ahat2)
    doc: dict = {"m1": args.m1, "m2": args.m2, "sxy2": args.sxy2, "ahat2": args.ahat2}
    with warnings.catch_warnings(record=True) as grabbed:
        warnings.simplefilter("always", ConfspecWarning)
        if args.gamma is not None:
            doc["gamma"] = args.gamma
            doc["beta"] = gamma_to_beta(args.gamma, **kwargs)
            if args.roundtrip:
                doc["gamma_roundtrip"] = beta_to_gamma(doc["beta"], **kwargs)
        else:
            doc["beta"] = args.beta
            doc["gamma"] = beta_to_gamma(args.beta, **kwargs)
            if args.roundtrip:
                doc["beta_roundtrip"] = gamma_to_beta(doc["gamma"], **kwargs)
        doc["warnings"] = [str(w.message) for w in grabbed
                           if issubclass(w.category, ConfspecWarning)]
    sys.stdout.write(json_document(doc))
    return EXIT_OK


def run_verify_command(cfg: RunConfig) -> int:
    results = run_verify(size=cfg.size, seed=cfg.verify_seed, overrides=dict(cfg.overrides))
    for res in results:
        sys.stdout.write(res.line() + "\n")
    failed = [r for r in results if not r.passed]
    sys.stdout.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    return EXIT_OK if not failed else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "convert":
            return run_convert(args)
        cfg = _config_from_args(args)
        if cfg.command == "simulate":
            return run_simulate(cfg)
        if cfg.command == "estimate":
            return run_estimate(cfg)
        return run_verify_command(cfg)
    except InputError as err:
        print(f"confspec: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as err:
        print(f"confspec: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
