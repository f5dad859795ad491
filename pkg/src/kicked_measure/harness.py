"""Command-line front end: experiment orchestration and flat-file artifacts.

Each subcommand runs one regime and writes a CSV (metadata lines prefixed
with `#`, then a column-name row), an optional JSON run manifest, and an
optional SVG plot. Plots are rendered purely from an already-written CSV,
including the analytic reference rate, which the runner embeds in the CSV
metadata; the plotting path never recomputes physics.

Exit codes: 0 success, 2 configuration error, 3 numeric tolerance failure,
4 lattice overflow.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classical_maps import DEFAULT_BLOCKS, Ensemble, ensemble_diffusion_fit, evolve_ensemble
from .errors import ConfigError, LatticeOverflowError, ResolutionError, ToleranceError
from .kernels import (
    classical_kernel_density,
    quantum_kernel,
    semiclassical_oscillatory,
    semiclassical_tail,
)
from .measured_evolution import (
    diffusion_fit,
    evolve_measured,
    moment_recursion,
    suggest_half_width,
)
from .model import (
    ModelParams,
    MomentumDistribution,
    PotentialSpec,
    force_derivative_moment,
    force_moment,
)
from .unitary_evolution import WaveFunction, evolve_unitary

CONFIG_KEYS = (
    "lambda", "hbar", "period", "tau", "potential",
    "half_width", "grid_points", "seed",
)

STOCHASTIC_REGIMES = ("classical-deterministic", "classical-random")

DEFAULT_UNITARY_HALF_WIDTH = 4096

# late-window variance below this fraction of the measured-rate prediction
# counts as saturated in the regime table
SATURATION_FACTOR = 0.25

TOLERANCES = {
    "kernel_tail": 1e-10,
    "lattice_tail": 1e-8,
    "kick_norm_loss": 1e-8,
    "force_moment_abs": 1e-10,
}


# ----------------------------------------------------------------- run config


@dataclass
class RunConfig:
    """One validated experiment: regime, physics inputs, sizes, output paths."""

    regime: str
    params: ModelParams
    potential: PotentialSpec
    potential_text: str
    grid_points: int
    steps: int
    trajectories: int
    seed: Optional[int]
    half_width: Optional[int]
    max_order: Optional[int]
    p_low: float
    p_high: float
    out: Optional[str]
    plot: Optional[str]
    manifest: Optional[str]


@dataclass
class RunResult:
    columns: Sequence[str]
    rows: list
    fitted: dict
    info: dict = field(default_factory=dict)
    table_text: Optional[str] = None


def parse_config_file(path: str) -> dict:
    """Plain key=value pairs, one per line, `#` comments. Returns raw strings."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _cfg_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"config key {key!r} needs a number, got {value!r}") from None


def _cfg_int(value: str, key: str) -> int:
    try:
        return int(value, 10)
    except ValueError:
        raise ConfigError(f"config key {key!r} needs an integer, got {value!r}") from None


def parse_potential(text: str, grid_points: int) -> PotentialSpec:
    """`cos` for the standard kick, or Fourier coefficient lists like
    `cos:1,0.3` or `cos:0.5;sin:0,0.25` (coefficients start at harmonic 1)."""
    spec = text.strip()
    try:
        if spec == "cos":
            return PotentialSpec.cosine(grid_points=grid_points)
        parts: dict = {}
        for chunk in spec.split(";"):
            name, sep, payload = chunk.partition(":")
            name = name.strip()
            if not sep or name not in ("cos", "sin"):
                raise ConfigError(
                    f"bad potential {text!r}: expected `cos` or "
                    "`cos:a1,a2,...` optionally joined with `;sin:b1,...`"
                )
            if name in parts:
                raise ConfigError(f"bad potential {text!r}: {name} given twice")
            try:
                parts[name] = [float(v) for v in payload.split(",")]
            except ValueError:
                raise ConfigError(
                    f"bad potential {text!r}: {name} coefficients must be numbers"
                ) from None
        return PotentialSpec.from_fourier(
            cos_coeffs=parts.get("cos", ()),
            sin_coeffs=parts.get("sin", ()),
            grid_points=grid_points,
        )
    except ValueError as exc:
        raise ConfigError(f"bad potential {text!r}: {exc}") from exc


def _merge(flag_value, file_values: dict, key: str, cast, default):
    if flag_value is not None:
        return flag_value
    if key in file_values:
        return cast(file_values[key], key)
    return default


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the optional config file and validate everything."""
    file_values = parse_config_file(args.config) if args.config else {}
    regime = args.regime

    lam = _merge(getattr(args, "lam", None), file_values, "lambda", _cfg_float, 1.0)
    hbar = _merge(getattr(args, "hbar", None), file_values, "hbar", _cfg_float, 1.0)
    period = _merge(getattr(args, "period", None), file_values, "period", _cfg_float, 1.0)
    tau = _merge(getattr(args, "tau", None), file_values, "tau", _cfg_float, None)
    grid_points = _merge(
        getattr(args, "grid_points", None), file_values, "grid_points", _cfg_int, 1024
    )
    half_width = _merge(
        getattr(args, "half_width", None), file_values, "half_width", _cfg_int, None
    )
    seed = _merge(getattr(args, "seed", None), file_values, "seed", _cfg_int, None)
    potential_text = _merge(
        getattr(args, "potential", None), file_values, "potential", lambda v, _k: v, "cos"
    )

    try:
        params = ModelParams(lam=lam, hbar=hbar, period=period, tau=tau)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    potential = parse_potential(potential_text, grid_points)

    steps = getattr(args, "steps", None)
    steps = 100 if steps is None else steps
    if steps < 1:
        raise ConfigError(f"--steps must be positive, got {steps}")

    trajectories = getattr(args, "trajectories", None)
    trajectories = 20000 if trajectories is None else trajectories
    needs_ensemble = regime in STOCHASTIC_REGIMES or regime == "regime-table"
    if needs_ensemble:
        if trajectories < 2 * DEFAULT_BLOCKS or trajectories % DEFAULT_BLOCKS != 0:
            raise ConfigError(
                f"--trajectories must be a multiple of {DEFAULT_BLOCKS} "
                f"(jackknife blocks) and at least {2 * DEFAULT_BLOCKS}, got {trajectories}"
            )
        if seed is None:
            raise ConfigError(f"--seed is required for {regime} (stochastic regime)")

    if half_width is not None and half_width < 1:
        raise ConfigError(f"half_width must be positive, got {half_width}")
    max_order = getattr(args, "max_order", None)

    p_low = getattr(args, "p_low", None)
    p_high = getattr(args, "p_high", None)
    if regime == "classical-deterministic":
        # single deterministic trajectories carry no diffusion statistics;
        # the default start is a thin momentum band with spread angles
        p_low = 0.0 if p_low is None else p_low
        p_high = 0.1 if p_high is None else p_high
    else:
        p_low = 0.0 if p_low is None else p_low
        p_high = p_low if p_high is None else p_high
    if p_high < p_low:
        raise ConfigError(f"--p-high {p_high} is below --p-low {p_low}")

    if args.plot and not args.out:
        raise ConfigError("--plot requires --out (plots are rendered from the CSV)")

    return RunConfig(
        regime=regime, params=params, potential=potential,
        potential_text=potential_text, grid_points=grid_points, steps=steps,
        trajectories=trajectories, seed=seed, half_width=half_width,
        max_order=max_order, p_low=p_low, p_high=p_high,
        out=args.out, plot=args.plot, manifest=args.manifest,
    )


# -------------------------------------------------------------------- runners


def _measured_rate(cfg: RunConfig) -> float:
    lam, period = cfg.params.lam, cfg.params.period
    return lam * lam * force_moment(cfg.potential, 2) / period


def _run_quantum_measured(cfg: RunConfig) -> RunResult:
    kern = quantum_kernel(cfg.params, cfg.potential, max_order=cfg.max_order)
    m = cfg.half_width
    if m is None:
        m = suggest_half_width(cfg.params, cfg.potential, kern, cfg.steps)
    dist0 = MomentumDistribution.delta(half_width=m)
    traj = evolve_measured(dist0, kern, cfg.steps)
    fit = diffusion_fit(traj, cfg.params.period)
    var = traj.variance()
    rows = [
        (i, traj.p1[i], traj.p2[i], traj.p3[i], traj.p4[i], var[i], traj.tail_mass[i])
        for i in range(len(traj))
    ]
    return RunResult(
        columns=("step", "p1", "p2", "p3", "p4", "var", "tail_mass"),
        rows=rows,
        fitted={"friction": fit.friction, "diffusion": fit.diffusion,
                "fit_residual": fit.residual},
        info={"half_width": m, "kernel_half_order": kern.half_order,
              "d_analytic": _measured_rate(cfg)},
    )


def _run_quantum_unitary(cfg: RunConfig) -> RunResult:
    m = cfg.half_width if cfg.half_width is not None else DEFAULT_UNITARY_HALF_WIDTH
    psi0 = WaveFunction.eigenstate(half_width=m)
    traj = evolve_unitary(psi0, cfg.params, cfg.potential, cfg.steps)
    fit = diffusion_fit(traj, cfg.params.period)
    var = traj.variance()
    rows = [
        (i, traj.p1[i], traj.p2[i], traj.p3[i], traj.p4[i], var[i], traj.norm_loss[i])
        for i in range(len(traj))
    ]
    return RunResult(
        columns=("step", "p1", "p2", "p3", "p4", "var", "norm_loss"),
        rows=rows,
        fitted={"friction": fit.friction, "diffusion": fit.diffusion,
                "fit_residual": fit.residual},
        info={"half_width": m, "d_analytic": _measured_rate(cfg)},
    )


def _run_classical(cfg: RunConfig, mode: str) -> RunResult:
    ens = Ensemble.band(cfg.trajectories, cfg.seed, cfg.p_low, cfg.p_high)
    traj = evolve_ensemble(ens, cfg.params, cfg.potential, cfg.steps, mode=mode)
    # the deterministic map needs its ballistic transient excluded from the fit
    start = cfg.steps // 2 if mode == "deterministic" else 0
    fit = ensemble_diffusion_fit(traj, cfg.params.period, start=start)
    rows = [
        (
            i,
            traj.p1[i], traj.p1_se[i], traj.p2[i], traj.p2_se[i],
            traj.p3[i], traj.p3_se[i], traj.p4[i], traj.p4_se[i],
        )
        for i in range(len(traj))
    ]
    return RunResult(
        columns=("step", "p1", "p1_se", "p2", "p2_se", "p3", "p3_se", "p4", "p4_se"),
        rows=rows,
        fitted={
            "friction": fit.friction, "friction_se": fit.friction_se,
            "diffusion": fit.diffusion, "diffusion_se": fit.diffusion_se,
            "fit_residual": fit.residual, "fit_start": start,
        },
        info={"trajectories": cfg.trajectories, "seed": cfg.seed,
              "p_low": cfg.p_low, "p_high": cfg.p_high,
              "d_analytic": _measured_rate(cfg)},
    )


def _run_kernel_compare(cfg: RunConfig) -> RunResult:
    lam, hbar = cfg.params.lam, cfg.params.hbar
    if lam <= 0.0:
        raise ConfigError("kernel-compare requires lambda > 0")
    kern = quantum_kernel(cfg.params, cfg.potential, max_order=cfg.max_order)
    k = kern.half_order
    rows = []
    for nu in range(0, k + 1):
        dp = nu * hbar
        w_q = kern.row[k + nu] / hbar  # probability -> density on the p axis
        w_cl = classical_kernel_density(dp, lam)
        w_osc = semiclassical_oscillatory(dp, cfg.params) if 0.0 < dp < lam else math.nan
        w_tail = semiclassical_tail(dp, cfg.params) if dp > lam else math.nan
        rows.append((nu, dp, w_q, w_cl, w_osc, w_tail))
    return RunResult(
        columns=("nu", "delta_p", "w_quantum", "w_classical",
                 "w_semiclassical_osc", "w_semiclassical_tail"),
        rows=rows,
        fitted={},
        info={"kernel_half_order": k, "kernel_tail_mass": kern.tail_mass},
    )


def _run_moments_compare(cfg: RunConfig) -> RunResult:
    q = moment_recursion(cfg.params, cfg.potential, cfg.steps, branch="quantum")
    c = moment_recursion(cfg.params, cfg.potential, cfg.steps, branch="classical")
    lam, hbar = cfg.params.lam, cfg.params.hbar
    gap_rate = lam * lam * hbar * hbar * force_derivative_moment(cfg.potential)
    rows = [
        (
            i,
            q.p1[i] - c.p1[i], q.p2[i] - c.p2[i],
            q.p3[i] - c.p3[i], q.p4[i] - c.p4[i],
            i * gap_rate,
        )
        for i in range(len(q))
    ]
    return RunResult(
        columns=("step", "d1", "d2", "d3", "d4", "predicted_d4"),
        rows=rows,
        fitted={"p4_gap_per_step": gap_rate},
        info={"d_analytic": _measured_rate(cfg)},
    )


def _run_regime_table(cfg: RunConfig) -> RunResult:
    params, potential = cfg.params, cfg.potential
    period = params.period
    d_measured = _measured_rate(cfg)
    rows = []

    qm = moment_recursion(params, potential, cfg.steps, branch="quantum")
    qm_fit = diffusion_fit(qm, period)
    rows.append(("quantum-measured", qm_fit.diffusion, 0.0, "diffusive"))

    m = cfg.half_width if cfg.half_width is not None else 1024
    traj_u = evolve_unitary(
        WaveFunction.eigenstate(half_width=m), params, potential, cfg.steps
    )
    var_u = traj_u.variance()
    saturated = var_u[-1] < SATURATION_FACTOR * d_measured * cfg.steps * period
    late_fit = diffusion_fit(traj_u, period)
    rows.append((
        "quantum-unitary", late_fit.diffusion, 0.0,
        "saturating" if saturated else "growing",
    ))

    def verdict(fit):
        return "diffusive" if fit.diffusion > 3.0 * fit.diffusion_se else "bounded"

    det = evolve_ensemble(
        Ensemble.band(cfg.trajectories, cfg.seed, 0.0, 0.1),
        params, potential, cfg.steps, mode="deterministic",
    )
    det_fit = ensemble_diffusion_fit(det, period, start=cfg.steps // 2)
    rows.append((
        "classical-deterministic", det_fit.diffusion, det_fit.diffusion_se, verdict(det_fit),
    ))

    rnd = evolve_ensemble(
        Ensemble.delta(cfg.trajectories, cfg.seed + 1),
        params, potential, cfg.steps, mode="randomized",
    )
    rnd_fit = ensemble_diffusion_fit(rnd, period)
    rows.append((
        "classical-random", rnd_fit.diffusion, rnd_fit.diffusion_se, verdict(rnd_fit),
    ))

    lines = [
        f"lambda={params.lam:g} hbar={params.hbar:g} period={period:g} "
        f"steps={cfg.steps} trajectories={cfg.trajectories}",
        f"analytic measured rate lambda^2<f^2>/T = {d_measured:.6g}",
        "",
        f"{'regime':<26}{'D':>14}{'D_se':>12}  verdict",
    ]
    for name, d, se, verd in rows:
        lines.append(f"{name:<26}{d:>14.6g}{se:>12.3g}  {verd}")
    return RunResult(
        columns=("regime", "d", "d_se", "verdict"),
        rows=rows,
        fitted={"d_measured_analytic": d_measured},
        info={"half_width": m, "seed": cfg.seed, "trajectories": cfg.trajectories},
        table_text="\n".join(lines),
    )


RUNNERS = {
    "quantum-measured": _run_quantum_measured,
    "quantum-unitary": _run_quantum_unitary,
    "classical-deterministic": lambda cfg: _run_classical(cfg, "deterministic"),
    "classical-random": lambda cfg: _run_classical(cfg, "randomized"),
    "kernel-compare": _run_kernel_compare,
    "moments-compare": _run_moments_compare,
    "regime-table": _run_regime_table,
}


# ------------------------------------------------------------------ artifacts


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _meta_lines(cfg: RunConfig, result: RunResult) -> list:
    p = cfg.params
    lines = [
        f"kicked-measure {cfg.regime}",
        f"lambda={_fmt(p.lam)}",
        f"hbar={_fmt(p.hbar)}",
        f"period={_fmt(p.period)}",
        f"tau={_fmt(p.tau)}",
        f"potential={cfg.potential_text}",
        f"grid_points={cfg.grid_points}",
        f"steps={cfg.steps}",
    ]
    for key, value in result.info.items():
        lines.append(f"{key}={_fmt(value)}")
    for key, value in result.fitted.items():
        lines.append(f"fitted_{key}={_fmt(value)}")
    return lines


def write_csv(path: str, meta: Sequence[str], columns: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in meta:
            f.write(f"# {line}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(path: str, cfg: RunConfig, result: RunResult) -> None:
    p = cfg.params
    doc = {
        "command": cfg.regime,
        "package": "kicked-measure",
        "version": __version__,
        "params": {
            "lambda": p.lam, "hbar": p.hbar, "period": p.period, "tau": p.tau,
            "potential": cfg.potential_text, "grid_points": cfg.grid_points,
            "half_width": cfg.half_width, "steps": cfg.steps,
            "trajectories": cfg.trajectories, "seed": cfg.seed,
        },
        "effective": result.info,
        "fitted": result.fitted,
        "tolerances": TOLERANCES,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "outputs": {"csv": cfg.out, "plot": cfg.plot},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


# ----------------------------------------------------------------------- plots


def _read_csv(path: str):
    meta = {}
    n_meta = 0
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            n_meta += 1
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            else:
                meta.setdefault("title", body)
    data = np.genfromtxt(path, delimiter=",", names=True, skip_header=n_meta)
    return meta, data


def plot_csv(csv_path: str, svg_path: str) -> None:
    """Render the standard plot for a written CSV; never recomputes physics."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    meta, data = _read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    names = data.dtype.names
    if "nu" in names:
        dp = data["delta_p"]
        ax.semilogy(dp, data["w_quantum"], "o", ms=3, label="quantum")
        finite_cl = np.isfinite(data["w_classical"]) & (data["w_classical"] > 0)
        ax.semilogy(dp[finite_cl], data["w_classical"][finite_cl], "-", label="classical")
        osc = data["w_semiclassical_osc"]
        good = np.isfinite(osc) & (osc > 0)
        ax.semilogy(dp[good], osc[good], "--", label="semiclassical (band)")
        tail = data["w_semiclassical_tail"]
        good = np.isfinite(tail) & (tail > 0)
        ax.semilogy(dp[good], tail[good], ":", label="semiclassical (tail)")
        ax.set_xlabel("momentum transfer")
        ax.set_ylabel("kernel density")
    else:
        step = data["step"]
        var = data["var"] if "var" in names else data["p2"] - data["p1"] ** 2
        ax.plot(step, var, "-", label="variance")
        period = float(meta.get("period", "1"))
        if "d_analytic" in meta:
            d = float(meta["d_analytic"])
            ax.plot(step, d * step * period, "--", label=f"D t, D = {d:g}")
        ax.set_xlabel("step")
        ax.set_ylabel("momentum variance")
    ax.legend(frameon=False)
    ax.set_title(meta.get("title", csv_path))
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)


# ------------------------------------------------------------------------ CLI


def _add_physics_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="kick strength (default 1)")
    p.add_argument("--hbar", type=float, default=None, help="hbar (default 1)")
    p.add_argument("--period", type=float, default=None, help="kick period T (default 1)")
    p.add_argument("--tau", type=float, default=None,
                   help="measurement offset inside the period (default T/2)")
    p.add_argument("--potential", type=str, default=None,
                   help="`cos` or Fourier lists `cos:a1,a2;sin:b1,...` (default cos)")
    p.add_argument("--grid-points", type=int, default=None,
                   help="angle-grid resolution, power of two (default 1024)")
    p.add_argument("--config", type=str, default=None,
                   help="key=value file merged under explicit flags")
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.add_argument("--plot", type=str, default=None,
                   help="SVG plot path (requires --out)")
    p.add_argument("--manifest", type=str, default=None, help="JSON manifest path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kicked-measure",
        description="Kicked quantum systems under repeated momentum measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    specs = [
        ("simulate-quantum-measured",
         "master-equation evolution of measured momentum occupations"),
        ("simulate-quantum-unitary",
         "unmeasured wavefunction evolution (dynamical localization)"),
        ("simulate-classical-deterministic", "classical kick-map ensemble"),
        ("simulate-classical-random", "random-angle kick-map ensemble"),
        ("kernel-compare",
         "one-step kernel: quantum vs classical vs semiclassical forms"),
        ("moments-compare", "quantum vs classical moment recursions"),
        ("regime-table", "diffusion summary across all four regimes"),
    ]
    parsers = {}
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        _add_physics_flags(p)
        parsers[name] = p

    for name in ("simulate-quantum-measured", "simulate-quantum-unitary",
                 "simulate-classical-deterministic", "simulate-classical-random",
                 "moments-compare", "regime-table"):
        parsers[name].add_argument("--steps", type=int, default=None,
                                   help="number of kicks (default 100)")
    for name in ("simulate-quantum-measured", "simulate-quantum-unitary",
                 "regime-table"):
        parsers[name].add_argument("--half-width", type=int, default=None,
                                   help="momentum lattice half-width M")
    for name in ("simulate-quantum-measured", "kernel-compare"):
        parsers[name].add_argument("--max-order", type=int, default=None,
                                   help="kernel half-order K (default adaptive)")
    for name in ("simulate-classical-deterministic", "simulate-classical-random",
                 "regime-table"):
        p = parsers[name]
        p.add_argument("--trajectories", type=int, default=None,
                       help=f"ensemble size, multiple of {DEFAULT_BLOCKS} (default 20000)")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (required for stochastic regimes)")
    for name in ("simulate-classical-deterministic", "simulate-classical-random"):
        p = parsers[name]
        p.add_argument("--p-low", type=float, default=None,
                       help="initial momentum band lower edge")
        p.add_argument("--p-high", type=float, default=None,
                       help="initial momentum band upper edge")
    return parser


def run(cfg: RunConfig) -> int:
    result = RUNNERS[cfg.regime](cfg)
    if result.table_text is not None:
        print(result.table_text)
    if cfg.out:
        write_csv(cfg.out, _meta_lines(cfg, result), result.columns, result.rows)
    if cfg.manifest:
        write_manifest(cfg.manifest, cfg, result)
    if cfg.plot:
        plot_csv(cfg.out, cfg.plot)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.regime = args.command.removeprefix("simulate-")
    try:
        cfg = build_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ToleranceError, ResolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LatticeOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
