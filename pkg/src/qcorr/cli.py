"""Command-line experiment runners.

Subcommands: ``free-decay``, ``dd-preserve``, ``revival``, ``state-prep`` and
``correlations``.  Exit status is 0 on success, 2 for configuration or input
errors and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Sequence

import numpy as np

from . import correlations as corr
from . import dynamics as dyn
from .config import ConfigError, RunConfig, config_to_dict, load_config
from .errors import DegenerateFitError, DomainError, InvalidStateError, TransitionNotFoundError
from .matrixio import MatrixFileError, dump_matrix, load_matrix
from .states import coeffs_from_density, deviation, thermal_state

log = logging.getLogger("qcorr")

CSV_FIELDS = [
    "t_ns", "c1", "c2", "c3", "mutual_bits", "classical_bits", "discord_bits", "geo_discord", "regime",
]
COMPARE_FIELDS = ["analytic_discord_bits", "taylor_mutual_bits", "taylor_classical_bits", "taylor_discord_bits"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def label_regimes(c2_abs: Sequence[float], c3_abs: Sequence[float]) -> list[str]:
    """Label each sample by which correlation is changing.

    ``I``: |c2| > |c3| and falling (classical decoherence);
    ``II``: |c2| <= |c3| and falling (quantum decoherence);
    ``III``: |c2| <= |c3| and rising (quantum revival);
    ``IV``: |c2| > |c3| and rising (classical revival).
    The first sample counts as falling.
    """
    labels = []
    for k, (a, b) in enumerate(zip(c2_abs, c3_abs)):
        rising = k > 0 and a > c2_abs[k - 1]
        if a > b:
            labels.append("IV" if rising else "I")
        else:
            labels.append("III" if rising else "II")
    return labels


def prepared_state(cfg: RunConfig) -> np.ndarray:
    seq = dyn.prep_sequence(cfg.prep.theta1, cfg.prep.theta2, cfg.prep.damping)
    return dyn.run_prep(seq, thermal_state(cfg.physics.epsilon), cfg.physics)[-1][1]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return f"{v:.9g}"


def curve_rows(traj: dyn.Trajectory, cfg: RunConfig, compare: bool = False) -> list[dict]:
    rows = []
    for s in traj.samples:
        mi = corr.mutual_information(s.rho)
        cc, _ = corr.classical_correlation(s.rho, cfg.optimizer)
        row = {
            "t_ns": s.t,
            "c1": s.c.c1,
            "c2": s.c.c2,
            "c3": s.c.c3,
            "mutual_bits": mi,
            "classical_bits": cc,
            "discord_bits": mi - cc,
            "geo_discord": corr.geometric_discord(s.rho),
        }
        if compare:
            row["analytic_discord_bits"] = corr.discord_analytic_bell(s.c)
            ti, tc, td = corr.taylor_correlations(s.c.c2, s.c.c3)
            row.update(taylor_mutual_bits=ti, taylor_classical_bits=tc, taylor_discord_bits=td)
        rows.append(row)
    c = np.abs(traj.coeffs)
    for row, label in zip(rows, label_regimes(c[:, 1], c[:, 2])):
        row["regime"] = label
    return rows


def write_csv(rows: list[dict], fh, extra: Sequence[str] = ()) -> None:
    fields = CSV_FIELDS + list(extra)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in fields])


def _safe_transition(traj: dyn.Trajectory) -> float | None:
    try:
        return dyn.detect_transition_time(traj)
    except TransitionNotFoundError as exc:
        log.warning("%s", exc)
        return None


def cmd_free_decay(cfg: RunConfig) -> tuple[list[dict], dict]:
    ex = cfg.experiment
    rho0 = prepared_state(cfg)
    c0 = coeffs_from_density(rho0).coeffs
    times = np.linspace(0.0, ex.t_max_ns, ex.points)
    if ex.model == "analytic":
        traj = dyn.analytic_trajectory(c0, times, cfg.physics)
    else:
        seq = dyn.PulseSequence((), tuple(times))
        traj = dyn.run_sequence(seq, rho0, cfg.ensemble.model(cfg.physics), cfg.physics)
    rows = curve_rows(traj, cfg, compare=True)

    rho23 = np.array([abs(s.rho[1, 2]) for s in traj.samples])
    keep = rho23 > 0
    closed = corr.critical_time(abs(c0.c2), abs(c0.c3), cfg.physics.t2e_star)
    summary = {
        "model": ex.model,
        "c0": list(c0),
        "t_c_ns": _safe_transition(traj),
        "t_c_closed_form_ns": closed.t_ns,
        "t_decay_ns": dyn.fit_gaussian_decay(times[keep], rho23[keep]),
    }
    return rows, summary


def _require_ensemble(cfg: RunConfig, command: str) -> None:
    if cfg.experiment.model != "ensemble":
        raise ConfigError(f"{command} needs the ensemble model; pulses have no closed-form flow here")


def cmd_dd_preserve(cfg: RunConfig) -> tuple[list[dict], dict]:
    _require_ensemble(cfg, "dd-preserve")
    ex = cfg.experiment
    rho0 = prepared_state(cfg)
    model = cfg.ensemble.model(cfg.physics)
    taus = np.linspace(ex.tau_ns / ex.tau_points, ex.tau_ns, ex.tau_points)
    times, states = [0.0], [rho0]
    for tau in taus:
        sample = dyn.run_sequence(dyn.dd_two_flip(float(tau)), rho0, model, cfg.physics).samples[0]
        times.append(sample.t)
        states.append(sample.rho)
    traj = dyn.Trajectory.from_states(times, states)
    rows = curve_rows(traj, cfg)

    c0 = traj.samples[0].c
    free_tc = corr.critical_time(abs(c0.c2), abs(c0.c3), cfg.physics.t2e_star).t_ns
    t_dd = _safe_transition(traj)
    summary = {
        "t_c_ns": t_dd,
        "free_t_c_ns": free_tc,
        "prolongation_factor": (t_dd / free_tc) if (t_dd is not None and free_tc > 0) else None,
    }
    return rows, summary


def cmd_revival(cfg: RunConfig) -> tuple[list[dict], dict]:
    _require_ensemble(cfg, "revival")
    ex = cfg.experiment
    rho0 = prepared_state(cfg)
    base = dyn.dd_revival(ex.tau4_ns, ex.n_blocks, ex.samples_per_block)
    seq = dyn.PulseSequence(base.events, base.readout_times + (4 * ex.tau4_ns * ex.n_blocks,))
    traj = dyn.run_sequence(seq, rho0, cfg.ensemble.model(cfg.physics), cfg.physics)
    rows = curve_rows(traj, cfg)

    c2_0 = abs(traj.samples[0].c.c2)
    ratios = []
    for s in traj.samples:
        k = s.t / (2 * ex.tau4_ns)
        if s.t > 0 and abs(k - round(k)) < 1e-9:
            ratios.append({"t_ns": s.t, "ratio": abs(s.c.c2) / c2_0})
    summary = {
        "revival_ratios": ratios,
        "regimes": [row["regime"] for row in rows],
    }
    return rows, summary


_STAGE_KEYS = {
    "rf1_theta2+delay": "populations",
    "rf2_half_pi": "rf2_half_pi",
    "rf1_half_pi": "rf1_half_pi",
    "mw2_pi": "mw2_pi",
}


def _fmt_matrix(m: np.ndarray) -> str:
    lines = []
    for row in m:
        lines.append("  ".join(f"{z.real:+.4f}{z.imag:+.4f}i" for z in row))
    return "\n".join(lines)


def cmd_state_prep(cfg: RunConfig) -> tuple[str, dict]:
    p, pr, ex = cfg.physics, cfg.prep, cfg.experiment
    seq = dyn.prep_sequence(pr.theta1, pr.theta2, pr.damping)
    stages = dyn.run_prep(seq, thermal_state(p.epsilon), p)
    predictions = dyn.prep_stage_predictions(pr.theta1, pr.theta2, pr.damping)

    out = io.StringIO()
    stage_summary = []
    for label, rho in stages:
        dev = deviation(rho, p.epsilon)
        print(f"== {label} (deviation, units of epsilon)", file=out)
        print(_fmt_matrix(dev), file=out)
        entry = {"stage": label, "deviation": dump_matrix(rho, p.epsilon)}
        key = _STAGE_KEYS.get(label)
        if key is not None:
            err = float(np.max(np.abs(dev - predictions[key])))
            print(f"-- closed form ({key}); max element deviation {err:.3e}", file=out)
            print(_fmt_matrix(predictions[key]), file=out)
            entry["max_deviation_from_closed_form"] = err
        stage_summary.append(entry)

    final = stages[-1][1]
    fit = coeffs_from_density(final, tol=0.05 * p.epsilon)
    errs = None
    if ex.error_samples > 0:
        errs = corr.ElementErrors.uniform(ex.element_error_eps * p.epsilon)
    report = corr.correlation_report(final, cfg.optimizer, errs=errs, n_samples=max(ex.error_samples, 100), seed=ex.seed)
    print(f"c = ({fit.coeffs.c1:.6g}, {fit.coeffs.c2:.6g}, {fit.coeffs.c3:.6g})", file=out)
    print(f"Bell-diagonal residual = {fit.residual:.3e}", file=out)
    for k, v in report.as_dict().items():
        print(f"{k} = {v}", file=out)
    summary = {
        "stages": stage_summary,
        "coeffs": list(fit.coeffs),
        "bell_residual": fit.residual,
        "correlations": report.as_dict(),
    }
    return out.getvalue(), summary


def cmd_correlations(path: str, cfg: RunConfig, error_samples: int | None = None) -> dict:
    mf = load_matrix(path)
    n = 1000 if error_samples is None else error_samples
    errs = mf.errors if (mf.errors is not None and n > 0) else None
    report = corr.correlation_report(
        mf.rho, cfg.optimizer, errs=errs, n_samples=max(n, 100), seed=cfg.experiment.seed
    )
    fit = coeffs_from_density(mf.rho, tol=0.05 * mf.epsilon)
    out = report.as_dict()
    out["bell_coeffs"] = list(fit.coeffs)
    out["bell_residual"] = fit.residual
    if fit.is_bell_diagonal:
        out["analytic"] = corr.bell_report(fit.coeffs)
    return out


def _emit_text(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, path: str | None) -> None:
    _emit_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--output", help="output file (default stdout)")
        p.add_argument("--summary", help="write the JSON summary here")
        p.add_argument("--seed", type=int)
        return p

    for name in ("free-decay", "dd-preserve", "revival"):
        p = common(sub.add_parser(name))
        p.add_argument("--model", choices=["analytic", "ensemble"])
        p.add_argument("--tmax-ns", type=float)
        p.add_argument("--points", type=int)
        p.add_argument("--tau-ns", type=float)
        p.add_argument("--tau4-ns", type=float)
        p.add_argument("--blocks", type=int)
    p = common(sub.add_parser("state-prep"))
    p.add_argument("--error-samples", type=int)
    p = common(sub.add_parser("correlations"))
    p.add_argument("input", help="density-matrix JSON file")
    p.add_argument("--error-samples", type=int, help="perturbation samples for error bars (default 1000)")
    return parser


_OVERRIDES = {
    "model": "model",
    "tmax_ns": "t_max_ns",
    "points": "points",
    "tau_ns": "tau_ns",
    "tau4_ns": "tau4_ns",
    "blocks": "n_blocks",
    "seed": "seed",
    "error_samples": "error_samples",
}


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {
        field: getattr(args, attr)
        for attr, field in _OVERRIDES.items()
        if getattr(args, attr, None) is not None
    }
    if changes:
        try:
            cfg = cfg.with_experiment(**changes)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        if args.command == "correlations":
            _emit_json(cmd_correlations(args.input, cfg, args.error_samples), args.output)
            return EXIT_OK
        if args.command == "state-prep":
            text, summary = cmd_state_prep(cfg)
            _emit_text(text, args.output)
        else:
            runner = {"free-decay": cmd_free_decay, "dd-preserve": cmd_dd_preserve, "revival": cmd_revival}
            rows, summary = runner[args.command](cfg)
            buf = io.StringIO()
            write_csv(rows, buf, COMPARE_FIELDS if args.command == "free-decay" else ())
            _emit_text(buf.getvalue(), args.output)
        if args.summary:
            summary["config"] = config_to_dict(cfg)
            _emit_json(summary, args.summary)
    except (ConfigError, MatrixFileError, InvalidStateError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateFitError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
