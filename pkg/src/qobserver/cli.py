"""Command line interface: ``verify``, ``simulate``, ``sweep`` and ``design``.

Exit codes: 0 on success, 1 when an invariant or the design search fails,
2 for usage and configuration errors.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import oracles
from .analysis import (
    AveragingSpec,
    DesignSearchError,
    _AverageOperator,
    design_for_epsilon,
    error_envelope,
    g_coeffs,
    h_coeffs,
    time_grid,
    trace_row,
)
from .augmented import build_augmented, verify_nondisturbance
from .numerics import NumericsError
from .observer import ObserverSpec, build_observer
from .plant import PlantSpec, build_plant
from .qlin import FLOW_TOL, check_realizability, flow_residual
from .report import (
    format_mu,
    plot_coefficients,
    plot_envelopes,
    trace_path,
    write_summary_csv,
    write_trace_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ORACLE_TOL = 1e-8

# Coupling used by --inject-bad-coupling: full rank, reaches both plant outputs.
BAD_COUPLING = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    omega_p: float = 1.0
    c_p1: tuple = (1.0, 0.0)
    mu_list: tuple = (5.0, 500.0, 50000.0)
    t_avg: float = 0.1
    t_max: float = 10.0
    dt: float = 0.001
    epsilon: float | None = None
    output_path: str = "out"
    figures: bool = False
    inject_bad_coupling: bool = field(default=False)

    def validate(self):
        if not (math.isfinite(self.omega_p) and self.omega_p > 0):
            raise ConfigError(f"omega_p must be positive, got {self.omega_p}")
        if len(self.c_p1) != 2 or not any(self.c_p1):
            raise ConfigError(f"c_p1 must be two reals, not both zero, got {self.c_p1}")
        if not self.mu_list:
            raise ConfigError("mu list is empty")
        for mu in self.mu_list:
            if not (math.isfinite(mu) and mu > 0):
                raise ConfigError(f"every mu must be positive, got {mu}")
        if not (0 < self.dt <= self.t_avg <= self.t_max):
            raise ConfigError(f"need 0 < dt <= t_avg <= t_max, got {self.dt}, {self.t_avg}, {self.t_max}")
        if self.epsilon is not None and not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        return self


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected comma separated numbers, got {text!r}") from None


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


_KEYS = {
    "omega_p": ("omega_p", _float),
    "c_p1": ("c_p1", _floats),
    "mu": ("mu_list", _floats),
    "t_avg": ("t_avg", _float),
    "t_max": ("t_max", _float),
    "dt": ("dt", _float),
    "epsilon": ("epsilon", _float),
    "out": ("output_path", str),
}


def parse_config_text(text):
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes equal underscores."""
    values = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        name, conv = _KEYS[key]
        values[name] = conv(value)
    return values


def config_fragment(cfg):
    lines = [
        f"omega_p={cfg.omega_p!r}",
        f"c_p1={cfg.c_p1[0]!r},{cfg.c_p1[1]!r}",
        "mu=" + ",".join(format_mu(m) for m in cfg.mu_list),
        f"t_avg={cfg.t_avg!r}",
    ]
    return "\n".join(lines)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega-p", type=float)
    common.add_argument("--c-p1", metavar="A,B")
    common.add_argument("--mu", metavar="V1,V2,...")
    common.add_argument("--t-avg", type=float)
    common.add_argument("--t-max", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    common.add_argument("--figures", action="store_true", help="also render PNG figures next to the CSV files")
    common.add_argument("--inject-bad-coupling", action="store_true", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="qobserver", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check realizability, non-disturbance and oracle agreement")
    sub.add_parser("simulate", parents=[common], help="write coefficient traces, one CSV per mu")
    sub.add_parser("sweep", parents=[common], help="simulate every mu and summarise the error envelopes")
    sub.add_parser("design", parents=[common], help="search (T, mu) meeting --epsilon")
    return parser


def resolve_config(args):
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    flags = {
        "omega_p": args.omega_p,
        "c_p1": _floats(args.c_p1) if args.c_p1 is not None else None,
        "mu_list": _floats(args.mu) if args.mu is not None else None,
        "t_avg": args.t_avg,
        "t_max": args.t_max,
        "dt": args.dt,
        "epsilon": args.epsilon,
        "output_path": args.out,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    cfg = replace(RunConfig(), **values, figures=args.figures, inject_bad_coupling=args.inject_bad_coupling)
    return cfg.validate()


def _build(cfg, mu):
    plant = build_plant(PlantSpec(cfg.omega_p, cfg.c_p1))
    obs = build_observer(ObserverSpec(mu), plant)
    return plant, obs, build_augmented(plant, obs)


def run_verify(cfg, out=None):
    """Run every invariant suite; returns the list of ``(name, residual, tol)``."""
    out = sys.stdout if out is None else out
    checks = []
    times = np.linspace(0.0, 10.0, 101)
    avg = AveragingSpec(cfg.t_avg)
    for mu in cfg.mu_list:
        plant, obs, aug = _build(cfg, mu)
        tag = f"mu={format_mu(mu)}"
        if cfg.inject_bad_coupling:
            aug_nd = build_augmented(plant, obs, r_c=BAD_COUPLING * mu)
        else:
            aug_nd = aug
        for name, sys_ in (("plant", plant.system), ("observer", obs.system), ("augmented", aug_nd.system)):
            rep = check_realizability(sys_)
            checks.append((f"{tag} realizability {name}", rep.residual, rep.tol))
            checks.append((f"{tag} flow preserves Theta {name}", flow_residual(sys_, times), FLOW_TOL))
        nd = verify_nondisturbance(aug_nd, times)
        checks.append((f"{tag} non-disturbance coupling", nd.coupling_residual, 1e-14))
        checks.append((f"{tag} non-disturbance reduction", nd.reduction_residual, 1e-14))
        checks.append((f"{tag} non-disturbance z_p trajectory", nd.trajectory_residual, 1e-9))

        op = _AverageOperator(aug, avg)
        worst_g = worst_h = worst_l = 0.0
        for t in np.linspace(cfg.t_avg, cfg.t_avg + 10.0, 5):
            worst_g = max(worst_g, float(np.max(np.abs(np.subtract(g_coeffs(obs, avg, t), oracles.quad_g(obs, cfg.t_avg, t))))))
            worst_h = max(worst_h, float(np.max(np.abs(np.subtract(h_coeffs(plant, avg, t), oracles.quad_h(plant.omega_p, cfg.t_avg, t))))))
            worst_l = max(worst_l, float(np.max(np.abs(op.l_row(t)[0] - oracles.quad_l(obs, cfg.t_avg, t)))))
        checks.append((f"{tag} oracle g vs quadrature", worst_g, ORACLE_TOL))
        checks.append((f"{tag} oracle h vs quadrature", worst_h, ORACLE_TOL))
        checks.append((f"{tag} oracle l vs quadrature", worst_l, ORACLE_TOL))

    for name, value, tol in checks:
        status = "PASS" if value <= tol else "FAIL"
        print(f"{status}  {name:<50s} residual={value:.3e}  tol={tol:.0e}", file=out)
    return checks


def cmd_verify(cfg):
    checks = run_verify(cfg)
    failed = [c for c in checks if not c[1] <= c[2]]
    if failed:
        print(f"FAILED: {failed[0][0]} (residual {failed[0][1]:.3e})", file=sys.stderr)
        return EXIT_FAIL
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def simulate_rows(cfg, mu):
    """Coefficient rows for one mu on the grid ``0, dt, ..., t_max``."""
    plant, obs, aug = _build(cfg, mu)
    op = _AverageOperator(aug, AveragingSpec(cfg.t_avg))
    return [trace_row(op, plant, obs, t) for t in time_grid(cfg.t_max, cfg.dt)]


def _all_rows(cfg):
    if len(cfg.mu_list) == 1:
        return [simulate_rows(cfg, cfg.mu_list[0])]
    workers = min(len(cfg.mu_list), os.cpu_count() or 1)
    if workers == 1:
        return [simulate_rows(cfg, mu) for mu in cfg.mu_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate_rows, [cfg] * len(cfg.mu_list), cfg.mu_list))


def _write_traces(cfg):
    os.makedirs(cfg.output_path, exist_ok=True)
    traces = dict(zip(cfg.mu_list, _all_rows(cfg)))
    for mu, rows in traces.items():
        path = trace_path(cfg.output_path, mu)
        write_trace_csv(path, rows)
        print(f"wrote {path} ({len(rows)} rows)")
    if cfg.figures:
        for family in ("k", "l"):
            path = plot_coefficients(traces, family, os.path.join(cfg.output_path, f"coefficients_{family}.png"))
            print(f"wrote {path}")
    return traces


def cmd_simulate(cfg):
    _write_traces(cfg)
    return EXIT_OK


SUMMARY_HEADER = (
    "mu", "omega_o", "sup_g_sq", "g_bound", "sup_h_sq", "combined",
    "max_abs_l1_f1", "max_abs_l2_f2", "max_abs_l3", "max_abs_l4", "max_abs_k1_f1",
)


def summarize(cfg, mu, rows):
    plant, obs, _ = _build(cfg, mu)
    env = error_envelope(plant, obs, AveragingSpec(cfg.t_avg))
    a = np.array([r[:11] for r in rows if r[0] >= cfg.t_avg])
    t, f1, f2, k1, l1, l2, l3, l4 = a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 7], a[:, 8], a[:, 9], a[:, 10]
    return (
        mu, obs.omega_o, env.sup_g_sq, env.g_bound, env.sup_h_sq, env.combined,
        np.max(np.abs(l1 - f1)), np.max(np.abs(l2 - f2)), np.max(np.abs(l3)), np.max(np.abs(l4)),
        np.max(np.abs(k1 - f1)),
    )


def cmd_sweep(cfg):
    traces = _write_traces(cfg)
    summary = [summarize(cfg, mu, rows) for mu, rows in traces.items()]
    path = os.path.join(cfg.output_path, "sweep_summary.csv")
    write_summary_csv(path, SUMMARY_HEADER, summary)
    print(" ".join(f"{h:>14s}" for h in SUMMARY_HEADER))
    for row in summary:
        print(" ".join(f"{v:14.6g}" for v in row))
    print(f"wrote {path}")
    if cfg.figures:
        cols = list(zip(*summary))
        fig = plot_envelopes(cols[0], cols[2], cols[3], cols[4][0], os.path.join(cfg.output_path, "envelopes.png"))
        print(f"wrote {fig}")
    return EXIT_OK


def cmd_design(cfg):
    if cfg.epsilon is None:
        raise ConfigError("design needs --epsilon")
    plant = build_plant(PlantSpec(cfg.omega_p, cfg.c_p1))
    try:
        avg, spec, env = design_for_epsilon(plant, cfg.epsilon)
    except DesignSearchError as exc:
        print(f"design search failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"epsilon        {cfg.epsilon!r}")
    print(f"t_avg          {avg.t_avg!r}")
    print(f"mu             {spec.mu!r}")
    print(f"sup_g_sq       {env.sup_g_sq!r}")
    print(f"sup_h_sq       {env.sup_h_sq!r}")
    print(f"combined       {env.combined!r}")
    print("# config fragment")
    print(config_fragment(replace(cfg, mu_list=(spec.mu,), t_avg=avg.t_avg)))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "simulate": cmd_simulate, "sweep": cmd_sweep, "design": cmd_design}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
