"""Command-line surface: simulate, fit, decode, select, gp, study.

Every command computes its full result first and only then writes output
files (atomically), so a failed run leaves nothing partial behind.  All
artifacts embed the package version, master seed and a config snapshot
sufficient to re-run the command; floats are serialized with 17 significant
digits, so a fixed seed reproduces files byte for byte.

Exit codes: 0 success, 2 usage/configuration, 3 ingestion, 4 fitting.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from .data import build_gp_series, load_mortality_table, load_series
from .errors import ConfigurationError, FittingError, IngestionError
from .hmm import HmmModel, ObservedSeries, forward_backward, forward_log_likelihood, simulate
from .inference import RunConfig, relabel, run_chains, summarize
from .mixture import MixtureEmission
from .model_selection import build_selection_report, score_candidate
from .priors import PriorConfig
from .report import fmt_float, render_report, atomic_write_text
from .scenarios import StudyReport, get_scenario, run_study
from .skewnormal import SkewNormalParams
from .transforms import ParameterSpace
from .viterbi import extract_changepoints, viterbi_decode

_ENV_WORKERS = "SNHMM_THREADS"


# --- model (de)serialization ------------------------------------------------


def model_to_dict(m: HmmModel) -> dict:
    return {
        "transition": [list(row) for row in m.transition],
        "initial": list(m.initial),
        "emissions": [
            {
                "weights": list(e.weights),
                "components": [
                    {"xi": c.xi, "omega": c.omega, "lambda": c.lam}
                    for c in e.components
                ],
            }
            for e in m.emissions
        ],
    }


def model_from_dict(d: dict) -> HmmModel:
    try:
        emissions = tuple(
            MixtureEmission(
                weights=np.asarray(e["weights"], dtype=float),
                components=tuple(
                    SkewNormalParams(
                        xi=float(c["xi"]), omega=float(c["omega"]), lam=float(c["lambda"])
                    )
                    for c in e["components"]
                ),
            )
            for e in d["emissions"]
        )
        return HmmModel(
            transition=np.asarray(d["transition"], dtype=float),
            initial=np.asarray(d["initial"], dtype=float),
            emissions=emissions,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"malformed model description: {exc}") from exc


# --- shared plumbing --------------------------------------------------------


def _meta(command: str, seed: int, config: dict) -> dict:
    return {
        "package": "snhmm",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
    }


def _csv_text(header: list[str], rows, meta_comment: str) -> str:
    lines = [f"# {meta_comment}", ",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(fmt_float(float(cell)))
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _write_outputs(out_dir: str, files: dict[str, str]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        atomic_write_text(os.path.join(out_dir, name), text)


def _compact(config: dict) -> str:
    return "snhmm " + __version__ + " " + json.dumps(config, sort_keys=True)


def _run_config_from_args(args, seed: int) -> RunConfig:
    workers = int(os.environ.get(_ENV_WORKERS, "1"))
    return RunConfig(
        chains=args.chains,
        warmup=args.warmup,
        iters=args.iters,
        seed=seed,
        leapfrog_steps=args.leapfrog_steps,
        target_accept=args.target_accept,
        workers=max(1, workers),
    )


def _prior_from_args(args) -> PriorConfig:
    if getattr(args, "prior_file", None):
        try:
            with open(args.prior_file) as fh:
                return PriorConfig.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read prior file {args.prior_file}: {exc}") from exc
    if getattr(args, "prior_scenario", None):
        return PriorConfig.from_scenario(args.prior_scenario)
    return PriorConfig.default()


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--warmup", type=int, default=500)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--leapfrog-steps", type=int, default=20)
    p.add_argument("--target-accept", type=float, default=0.8)
    p.add_argument("--prior-scenario", choices=["baseline", "S1", "S2"])
    p.add_argument("--prior-file")


def _fit_series(series: ObservedSeries, args, prior: PriorConfig, run: RunConfig):
    space = ParameterSpace(
        n_states=args.states,
        n_components=args.components,
        shared_weights=getattr(args, "shared_weights", False),
    )
    draws = relabel(run_chains(series, space, prior, run))
    return space, draws, summarize(draws)


# --- commands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    if (args.scenario is None) == (args.model_file is None):
        raise ConfigurationError("give exactly one of --scenario or --model-file")
    if args.scenario is not None:
        sc = get_scenario(args.scenario)
        model, t_len = sc.model, sc.t_len
        default_seed = sc.seed
    else:
        try:
            with open(args.model_file) as fh:
                model = model_from_dict(json.load(fh))
        except OSError as exc:
            raise IngestionError(f"cannot read model file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise IngestionError(f"model file is not valid JSON: {exc}") from exc
        t_len, default_seed = 100, 0
    if args.T is not None:
        t_len = args.T
    seed = args.seed if args.seed is not None else default_seed

    series, states, comps = simulate(model, t_len, np.random.default_rng(seed))
    config = {
        "scenario": args.scenario,
        "model_file": args.model_file,
        "T": t_len,
        "seed": seed,
    }
    truth = _meta("simulate", seed, config)
    truth["model"] = model_to_dict(model)
    truth["state_path"] = [int(z) + 1 for z in states]
    truth["component_path"] = [int(k) + 1 for k in comps]
    files = {
        "series.csv": _csv_text(
            ["t", "value"],
            [(t + 1, v) for t, v in enumerate(series.values)],
            _compact(config),
        ),
        "truth.json": render_report(truth),
    }
    _write_outputs(args.out, files)
    return 0


def cmd_fit(args) -> int:
    series = load_series(args.data, args.value_column, args.time_column)
    prior = _prior_from_args(args)
    seed = args.seed if args.seed is not None else 0
    run = _run_config_from_args(args, seed)
    space, draws, summary = _fit_series(series, args, prior, run)
    config = {
        "data": args.data,
        "value_column": args.value_column,
        "states": args.states,
        "components": args.components,
        "shared_weights": args.shared_weights,
        "prior": prior.to_dict(),
        "run": run.to_dict(),
    }
    fit = _meta("fit", seed, config)
    fit["summary"] = summary.as_rows()
    fit["point_model"] = model_to_dict(summary.point_model)
    fit["diagnostics"] = {
        "accept_rate": list(draws.accept_rate),
        "divergences": [int(v) for v in draws.divergences],
        "step_size": list(draws.step_size),
    }
    files = {"fit.json": render_report(fit)}
    if args.save_draws:
        flat = draws.flat
        chains, iters, _ = draws.draws.shape
        rows = [
            [c + 1, i + 1] + list(draws.draws[c, i])
            for c in range(chains)
            for i in range(iters)
        ]
        files["draws.csv"] = _csv_text(
            ["chain", "iteration"] + draws.names, rows, _compact(config)
        )
    _write_outputs(args.out, files)
    return 0


def _load_point_model(fit_path: str) -> tuple[HmmModel, dict]:
    try:
        with open(fit_path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IngestionError(f"cannot read fit file {fit_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"fit file {fit_path} is not valid JSON: {exc}") from exc
    if "point_model" not in doc:
        raise IngestionError(f"fit file {fit_path} lacks a point_model entry")
    return model_from_dict(doc["point_model"]), doc


def cmd_decode(args) -> int:
    series = load_series(args.data, args.value_column, args.time_column)
    model, fit_doc = _load_point_model(args.fit)
    result = viterbi_decode(model, series)
    changepoints = extract_changepoints(result)
    config = {"data": args.data, "fit": args.fit}
    files = {
        "path.csv": _csv_text(
            ["t", "state"],
            [(t + 1, int(z) + 1) for t, z in enumerate(result.path)],
            _compact(config),
        ),
        "changepoints.csv": _csv_text(
            ["t", "from_state", "to_state"], changepoints, _compact(config)
        ),
        "decode.json": render_report(
            {
                **_meta("decode", int(fit_doc.get("seed", 0)), config),
                "n_changepoints": len(changepoints),
                "changepoints": [list(c) for c in changepoints],
            }
        ),
    }
    _write_outputs(args.out, files)
    return 0


def cmd_select(args) -> int:
    series = load_series(args.data, args.value_column, args.time_column)
    try:
        states = [int(s) for s in args.states.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad --states list {args.states!r}") from exc
    if not states:
        raise ConfigurationError("--states must list at least one state count")
    prior = _prior_from_args(args)
    seed = args.seed if args.seed is not None else 0
    run = _run_config_from_args(args, seed)
    candidates = []
    for z in states:
        space = ParameterSpace(n_states=z, n_components=args.components)
        draws = relabel(run_chains(series, space, prior, run))
        summary = summarize(draws)
        loglik = forward_log_likelihood(summary.point_model, series)
        smoothed = forward_backward(summary.point_model, series)
        candidates.append(
            score_candidate(z, args.components, loglik, len(series), smoothed)
        )
    rep = build_selection_report(candidates)
    config = {
        "data": args.data,
        "states": states,
        "components": args.components,
        "prior": prior.to_dict(),
        "run": run.to_dict(),
    }
    doc = _meta("select", seed, config)
    doc["candidates"] = [
        {
            "states": c.n_states,
            "loglik": c.loglik,
            "p": c.p,
            "n": c.n_obs,
            "bic": c.bic,
            "entropy": c.entropy,
            "icl": c.icl,
        }
        for c in rep.candidates
    ]
    doc["ranking_bic"] = list(rep.ranking_bic)
    doc["ranking_icl"] = list(rep.ranking_icl)
    doc["selected"] = rep.selected
    _write_outputs(args.out, {"selection.json": render_report(doc)})
    return 0


def _parse_range(text: str, what: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise ConfigurationError(f"bad {what} range {text!r}; expected LO:HI") from exc
    if hi < lo:
        raise ConfigurationError(f"empty {what} range {text!r}")
    return lo, hi


def cmd_gp(args) -> int:
    deaths = load_mortality_table(args.deaths, "deaths")
    exposures = load_mortality_table(args.exposures, "exposures")
    ages = _parse_range(args.ages, "age")
    years = _parse_range(args.years, "year")
    gp = build_gp_series(deaths, exposures, ages=ages, years=years, order=args.order)
    config = {
        "deaths": args.deaths,
        "exposures": args.exposures,
        "ages": list(ages),
        "years": list(years),
        "order": args.order,
    }
    rows = [
        (t + 1, label, value)
        for t, (label, value) in enumerate(zip(gp.series.labels, gp.series.values))
    ]
    files = {
        "gp.csv": _csv_text(["t", "cell", "value"], rows, _compact(config)),
        "exclusions.log": "".join(line + "\n" for line in gp.exclusions),
    }
    _write_outputs(args.out, files)
    return 0


def _study_files(report: StudyReport, config: dict) -> dict[str, str]:
    doc = _meta("study", report.seed, config)
    doc["truth_model"] = model_to_dict(report.truth_model)
    doc["point_model"] = model_to_dict(report.summary.point_model)
    doc["parameters"] = report.param_rows
    doc["confusion"] = [list(row) for row in report.confusion.counts]
    doc["accuracy"] = report.accuracy
    doc["kappa"] = report.kappa
    doc["coverage"] = report.coverage
    doc["changepoints"] = [list(c) for c in report.changepoints]
    doc["alignment"] = [int(p) + 1 for p in report.alignment]
    doc["bic"] = report.bic
    doc["icl"] = report.icl
    doc["diagnostics"] = {
        "accept_rate": list(report.draws.accept_rate),
        "divergences": [int(v) for v in report.draws.divergences],
        "step_size": list(report.draws.step_size),
    }
    meta = _compact(config)
    param_rows = [
        (
            r["parameter"],
            r["truth"],
            r["mean"],
            r["sd"],
            r["q05"],
            r["q95"],
            int(r["covered"]),
        )
        for r in report.param_rows
    ]
    transition_rows = [
        (
            r["parameter"],
            r["truth"],
            r["mean"],
            r["q05"],
            r["q95"],
        )
        for r in report.transition_rows
    ]
    confusion_rows = [
        (i + 1, j + 1, int(report.confusion.counts[i, j]))
        for i in range(report.confusion.counts.shape[0])
        for j in range(report.confusion.counts.shape[1])
    ]
    path_rows = [
        (t + 1, int(report.true_path[t]) + 1, int(report.decoded_path[t]) + 1)
        for t in range(len(report.true_path))
    ]
    return {
        "study.json": render_report(doc),
        "params_long.csv": _csv_text(
            ["parameter", "truth", "mean", "sd", "q05", "q95", "covered"],
            param_rows,
            meta,
        ),
        "transitions_long.csv": _csv_text(
            ["parameter", "truth", "mean", "q05", "q95"], transition_rows, meta
        ),
        "confusion.csv": _csv_text(
            ["true_state", "decoded_state", "count"], confusion_rows, meta
        ),
        "paths.csv": _csv_text(["t", "true_state", "decoded_state"], path_rows, meta),
        "series.csv": _csv_text(
            ["t", "value"],
            [(t + 1, v) for t, v in enumerate(report.series.values)],
            meta,
        ),
    }


def cmd_study(args) -> int:
    sc = get_scenario(args.scenario)
    if args.seed is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
    if args.T is not None:
        sc = dataclasses.replace(sc, t_len=args.T)
    run = _run_config_from_args(args, sc.seed)
    prior = None
    if args.prior_scenario or args.prior_file:
        prior = _prior_from_args(args)
    report = run_study(sc, run=run, prior=prior)
    config = {
        "scenario": sc.name,
        "T": sc.t_len,
        "seed": sc.seed,
        "prior": report.prior.to_dict(),
        "run": run.to_dict(),
    }
    _write_outputs(args.out, _study_files(report, config))
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snhmm",
        description="Skew-normal mixture HMMs: simulate, fit by HMC, decode, select",
    )
    parser.add_argument("--version", action="version", version=f"snhmm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a series from a scenario or model file")
    p.add_argument("--scenario")
    p.add_argument("--model-file")
    p.add_argument("--T", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the model to a series by HMC")
    p.add_argument("--data", required=True)
    p.add_argument("--value-column", default="value")
    p.add_argument("--time-column")
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--shared-weights", action="store_true")
    p.add_argument("--save-draws", action="store_true")
    _add_fit_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("decode", help="Viterbi path and changepoints at a fitted model")
    p.add_argument("--data", required=True)
    p.add_argument("--value-column", default="value")
    p.add_argument("--time-column")
    p.add_argument("--fit", required=True, help="fit.json produced by the fit command")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("select", help="compare candidate state counts by BIC and ICL")
    p.add_argument("--data", required=True)
    p.add_argument("--value-column", default="value")
    p.add_argument("--time-column")
    p.add_argument("--states", default="2,3")
    p.add_argument("--components", type=int, default=2)
    _add_fit_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("gp", help="build the gender-gap series from mortality tables")
    p.add_argument("--deaths", required=True)
    p.add_argument("--exposures", required=True)
    p.add_argument("--ages", default="0:90")
    p.add_argument("--years", default="1960:1975")
    p.add_argument("--order", choices=["year-major", "age-major"], default="year-major")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gp)

    p = sub.add_parser("study", help="end-to-end simulation study with recovery metrics")
    p.add_argument("--scenario", required=True)
    p.add_argument("--T", type=int)
    _add_fit_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IngestionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FittingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
