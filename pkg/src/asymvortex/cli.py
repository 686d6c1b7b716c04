"""Command-line entry points: ``asymvortex {winfty,solve,evolve,spectrum,sweep,verify}``.

Every numeric option may also come from a JSON file (``--config``); flags
given on the command line win.  Exit codes: 0 success, 1 failed
verification, 2 configuration or I/O error, 3 convergence failure,
4 numeric failure.  Errors are reported as one JSON object on stderr.
"""

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GridMismatchError,
    NumericError,
)
from .field_core import (
    SpectralConfig,
    cartesian_table,
    make_grid,
    norm_X,
    profile_table,
    random_field,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Parameters of one CLI run; unset grid fields fall back to SpectralConfig."""

    alpha: float = 10.0
    lam: float = 0.05
    r_max: float = None
    n_r: int = None
    n_modes: int = None
    tol: float = None
    dt: float = 5e-3
    t_final: float = 8.0
    out: str = "out"
    seed: int = 0
    check: str = None
    perturb: str = "d2"
    alphas: list = field(default_factory=lambda: [1.0, 10.0, 100.0])
    lambdas: list = field(default_factory=lambda: [0.01, 0.05, 0.1])
    k: int = 9
    workers: int = 1

    def spectral(self):
        base = SpectralConfig()
        return SpectralConfig(
            r_max=base.r_max if self.r_max is None else self.r_max,
            n_r=base.n_r if self.n_r is None else self.n_r,
            n_modes=base.n_modes if self.n_modes is None else self.n_modes,
            picard_tol=base.picard_tol if self.tol is None else self.tol,
        )

    def evolution(self):
        from .stability import EvolutionConfig

        if not self.t_final > 0:
            raise ConfigError("t_final", "must be positive")
        window = (min(2.0, 0.25 * self.t_final), self.t_final)
        try:
            return EvolutionConfig(dt=self.dt, t_final=self.t_final, fit_window=window)
        except DomainError as exc:
            raise ConfigError("dt", str(exc)) from exc

    def validate(self):
        if not math.isfinite(self.alpha):
            raise ConfigError("alpha", "must be finite")
        if not 0.0 <= self.lam < 1.0:
            raise ConfigError("lambda", f"must lie in [0, 1), got {self.lam}")
        if self.check not in (None, "lambda2", "largeR", "smallR"):
            raise ConfigError("check", f"unknown check {self.check!r}")
        if self.perturb not in ("d1", "d2", "random"):
            raise ConfigError("perturb", f"unknown perturbation {self.perturb!r}")
        if self.k < 4:
            raise ConfigError("k", "must be >= 4")
        self.spectral()
        return self


# --- output helpers ---------------------------------------------------------------


def _outdir(cfg):
    path = Path(cfg.out)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError("out", f"output directory not writable: {exc}") from exc
    return path


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.asarray(rows):
            writer.writerow([repr(float(x)) for x in np.real(row)])


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- subcommands ------------------------------------------------------------------


def run_winfty(cfg):
    from .winfty import compute_w_infty

    out = _outdir(cfg)
    grid = make_grid(cfg.spectral())
    profile, _ = compute_w_infty(grid)
    header, rows = profile.csv_rows()
    write_csv(out / "winfty_profile.csv", header, rows)
    summary = profile.summary()
    write_json(out / "winfty_summary.json", summary)
    return summary


def _check_report(cfg, spectral):
    from .vortex import (
        expansion_check_lambda,
        large_R_check,
        quadratic_ratio,
        small_R_check,
    )

    if cfg.check == "lambda2":
        return expansion_check_lambda(cfg.alpha, cfg.lam, spectral)
    if cfg.check == "largeR":
        rows = large_R_check(cfg.lam, [a for a in cfg.alphas if abs(a) >= 1], spectral)
        return {"lambda": cfg.lam, "rows": rows}
    rows = small_R_check(cfg.lam, [cfg.alpha, cfg.alpha / 2.0], spectral)
    return {"lambda": cfg.lam, "rows": rows, "ratio": quadratic_ratio(rows)[0]}


def run_solve(cfg):
    from .vortex import picard_solve

    out = _outdir(cfg)
    spectral = cfg.spectral()
    sol = picard_solve(cfg.alpha, cfg.lam, spectral)
    header, rows = profile_table(sol.omega)
    write_csv(out / "solution_profile.csv", header, rows)
    header, rows = cartesian_table(sol.omega)
    write_csv(out / "solution_contour.csv", ["x1", "x2", "omega"], rows)
    summary = sol.summary()
    write_json(out / "solve_summary.json", summary)
    if cfg.check:
        report = _check_report(cfg, spectral)
        write_json(out / f"check_{cfg.check}.json", report)
        summary = dict(summary, check=report)
    return summary


def _perturbation(cfg, sol):
    from .stability import perturbation_amplitude, translation_modes

    eps = perturbation_amplitude(cfg.alpha)
    if cfg.perturb == "random":
        base = random_field(sol.grid, sol.w.n_modes, np.random.default_rng(cfg.seed), max_mode=6)
    else:
        d1, d2 = translation_modes(sol)
        base = d1 if cfg.perturb == "d1" else d2
        if norm_X(base) == 0:
            # alpha = 0: translate the Gaussian instead
            from .field_core import gaussian_profile, partial

            base = partial(gaussian_profile(sol.grid, sol.w.n_modes), 1 if cfg.perturb == "d1" else 2)
    return base * (eps / norm_X(base))


def run_evolve(cfg):
    from .stability import evolve_perturbation
    from .vortex import picard_solve

    out = _outdir(cfg)
    sol = picard_solve(cfg.alpha, cfg.lam, cfg.spectral())
    report = evolve_perturbation(sol, _perturbation(cfg, sol), cfg.evolution())
    header, rows = report.csv_rows()
    write_csv(out / "trajectory.csv", header, rows)
    summary = report.summary()
    write_json(out / "stability_report.json", summary)
    return summary


def run_spectrum(cfg):
    from .stability import leading_eigenvalue
    from .vortex import picard_solve

    out = _outdir(cfg)
    sol = picard_solve(cfg.alpha, cfg.lam, cfg.spectral())
    vals = leading_eigenvalue(sol, cfg.k)
    summary = {
        "alpha": cfg.alpha,
        "lambda": cfg.lam,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in vals],
    }
    write_json(out / "spectrum.json", summary)
    return summary


SWEEP_HEADER = [
    "alpha", "lambda", "residual", "iterations", "contraction_max", "norm_Y",
    "mean_error", "symmetric", "positive", "eigen_residual_1", "eigen_residual_2", "all_pass",
]


def sweep_row(alpha, lam, spectral):
    """Solve at ``(alpha, lam)`` and evaluate the solution invariants."""
    from .field_core import synthesize
    from .stability import translation_residuals
    from .vortex import picard_solve

    sol = picard_solve(alpha, lam, spectral)
    om = sol.omega
    mean_err = abs(om.mean() - alpha)
    odd = float(np.max(np.abs(sol.w.coeffs[1::2]))) if sol.w.n_modes else 0.0
    symmetric = odd <= 1e-12 * max(1.0, float(np.max(np.abs(sol.w.coeffs))))
    vals = synthesize(om, max(4 * om.n_modes + 4, 32))
    positive = True
    if alpha > 0 and lam <= 0.1:
        positive = bool(vals.min() >= -1e-12 * vals.max())
    r1, r2 = translation_residuals(sol)
    ok = (
        sol.residual_X <= max(spectral.picard_tol, 1e-10)
        and mean_err <= 1e-9 * max(1.0, abs(alpha))
        and symmetric
        and positive
        and r1 < 1e-5
        and r2 < 1e-5
    )
    return [alpha, lam, sol.residual_X, sol.iterations, max(sol.contraction_estimates, default=0.0),
            sol.summary()["norm_Y"], mean_err, symmetric, positive, r1, r2, ok]


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def run_sweep(cfg):
    out = _outdir(cfg)
    spectral = cfg.spectral()
    pairs = [(a, l) for a in cfg.alphas for l in cfg.lambdas]
    for _, lam in pairs:
        if not 0.0 <= lam < 1.0:
            raise ConfigError("lambdas", f"value {lam} outside [0, 1)")
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(sweep_row, *zip(*pairs), [spectral] * len(pairs)))
    else:
        rows = [sweep_row(a, l, spectral) for a, l in pairs]
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([_cell(x) for x in row])
    summary = {"rows": len(rows), "all_pass": all(bool(r[-1]) for r in rows)}
    write_json(out / "sweep_summary.json", summary)
    return summary


def verify_invariants(spectral=None):
    """Quick invariant suite; returns ``{name: (passed, value)}``."""
    from .field_core import g_lambda_profile, gaussian_profile
    from .operators import apply_L, apply_M, skew_defect, spectrum_L
    from .stability import translation_residuals
    from .vortex import picard_solve
    from .winfty import compute_w_infty

    spectral = spectral or SpectralConfig()
    grid = make_grid(spectral)
    n = spectral.n_modes
    rng = np.random.default_rng(0)
    results = {}
    G = gaussian_profile(grid, n)
    results["L_G"] = norm_X(apply_L(G))
    g_lam = g_lambda_profile(0.1, grid, n)
    results["L_lambda_G_lambda"] = norm_X(apply_L(g_lam) + apply_M(g_lam) * 0.1)
    defect = 0.0
    for _ in range(10):
        a = random_field(grid, n, rng, max_mode=4)
        b = random_field(grid, n, rng, max_mode=4)
        defect = max(defect, abs(skew_defect(a, b)))
    results["Lambda_skew"] = defect
    spec = np.array(spectrum_L(grid, 9))
    results["spectrum_L"] = float(np.max(np.abs(spec - [0.5, 0.5, 1, 1, 1, 1.5, 1.5, 1.5, 1.5])))
    profile, _ = compute_w_infty(grid)
    results["Lambda_winf_residual"] = profile.residual
    rr = np.linspace(0.1, 10.0, 200)
    wr = profile.green.pair.wronskian(rr)
    results["wronskian_variation"] = float(np.ptp(wr) / profile.w0)
    sol = picard_solve(10.0, 0.05, spectral)
    results["picard_residual"] = sol.residual_X
    results["translation_residual"] = max(translation_residuals(sol))
    limits = {
        "L_G": 1e-8, "L_lambda_G_lambda": 1e-7, "Lambda_skew": 1e-8, "spectrum_L": 1e-6,
        "Lambda_winf_residual": 1e-6, "wronskian_variation": 1e-6, "picard_residual": 1e-10,
        "translation_residual": 1e-5,
    }
    return {k: (bool(v < limits[k]), float(v)) for k, v in results.items()}


def run_verify(cfg):
    out = _outdir(cfg)
    results = verify_invariants(cfg.spectral())
    for name, (ok, value) in results.items():
        print(f"{'PASS' if ok else 'FAIL'} {name} {value:.3e}")
    summary = {name: {"pass": ok, "value": value} for name, (ok, value) in results.items()}
    write_json(out / "verify.json", summary)
    return summary


COMMANDS = {
    "winfty": run_winfty,
    "solve": run_solve,
    "evolve": run_evolve,
    "spectrum": run_spectrum,
    "sweep": run_sweep,
    "verify": run_verify,
}


# --- argument parsing -------------------------------------------------------------


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run parameters")
    common.add_argument("--alpha", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--rmax", dest="r_max", type=float)
    common.add_argument("--nr", dest="n_r", type=int)
    common.add_argument("--nmodes", dest="n_modes", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--tfinal", dest="t_final", type=float)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--check", choices=["lambda2", "largeR", "smallR"])
    common.add_argument("--perturb", choices=["d1", "d2", "random"])
    common.add_argument("--alphas", type=_floats)
    common.add_argument("--lambdas", type=_floats)
    common.add_argument("--k", type=int, help="number of eigenvalues for 'spectrum'")
    common.add_argument("--workers", type=int, help="processes for 'sweep'")
    parser = argparse.ArgumentParser(prog="asymvortex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_CONFIG_ALIASES = {"lambda": "lam", "rmax": "r_max", "nr": "n_r", "nmodes": "n_modes", "tfinal": "t_final"}


def resolve_config(args):
    """Defaults, then the JSON config file, then explicit flags."""
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
        names = {f.name for f in fields(RunConfig)}
        for key, value in raw.items():
            key = _CONFIG_ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(key, "unknown configuration key")
            values[key] = value
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            values[f.name] = value
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc
    return cfg.validate()


def _fail(code, exc, history=None):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if history is not None:
        payload["history"] = [float(h) for h in history]
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        summary = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError, GridMismatchError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, exc, exc.history)
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    if args.command != "verify":
        print(json.dumps(_clean(summary), sort_keys=True))
        return EXIT_OK
    return EXIT_OK if all(v["pass"] for v in summary.values()) else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
