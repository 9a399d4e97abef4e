"""``qdb`` command line: fit, predict, reproduce published tables, pignistic transform."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field

from . import data
from .dynamics import DEFAULT_TIME, HamiltonianParams
from .fit import (
    GRID_STEP,
    H_RANGE,
    FitWarning,
    fit_experiment,
    markov_total_probability,
    mean_relative_error,
    predict,
)
from .measurement import CD_UNCERTAIN_WEIGHT, D_ALONE_UNCERTAIN_WEIGHT, MassFunction, pignistic_transform

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_REPRO_FAIL = 2

REPRO_TOL = 0.004


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    format: str = "table"
    w_cd: float = CD_UNCERTAIN_WEIGHT
    w_d: float = D_ALONE_UNCERTAIN_WEIGHT
    t: float = DEFAULT_TIME
    h_range: tuple[float, float] = field(default=H_RANGE)
    grid_step: float = GRID_STEP

    def __post_init__(self):
        if self.command not in ("fit", "predict", "reproduce", "ppt"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("table", "csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        for name in ("w_cd", "w_d"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError("time must be finite and >= 0")
        if not self.h_range[0] < self.h_range[1]:
            raise ValueError("--hmin must be below --hmax")
        if not self.grid_step > 0:
            raise ValueError("--grid-step must be positive")

    def fit_kwargs(self) -> dict:
        return dict(w_cd=self.w_cd, w_d=self.w_d, t=self.t, h_range=self.h_range, grid_step=self.grid_step)


class UsageError(Exception):
    pass


def _f4(x) -> str:
    return "-" if x is None else f"{x:.4f}"


def render_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[c if isinstance(c, str) else _f4(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(r, widths))) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _records(config: RunConfig) -> list[data.ExperimentRecord]:
    if config.input_path:
        return data.load_experiments(config.input_path)
    return data.narrow_experiments()


def _fit_all(records, config: RunConfig):
    fits = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FitWarning)
        for r in records:
            fits.append(fit_experiment(r.p_g, r.p_b, r.p_attack_given_good, r.p_attack_given_bad, **config.fit_kwargs()))
    notes = [str(w.message) for w in caught if issubclass(w.category, FitWarning)]
    return fits, notes


def cmd_fit(config: RunConfig) -> tuple[str, int]:
    records = _records(config)
    fits, notes = _fit_all(records, config)
    if config.format != "table":
        return data.format_results(records, config.format, fits), EXIT_OK

    header = ["source", "face", "h_G", "h_B", "P(A|G)", "P(A|B)", "P_T", "P(A)", "P(A)-P_T", "max resid"]
    rows = []
    for r, f in zip(records, fits):
        p = f.prediction
        rows.append([r.source_id, r.face_type.value, f.params.h_g, f.params.h_b,
                     p.p_attack_given_good, p.p_attack_given_bad, p.p_total_cd, p.p_attack_d_alone,
                     p.interference, f"{max(f.residual_good, f.residual_bad):.1e}"])
    out = render_table(header, rows)
    pairs = [(r.p_t_observed, f.prediction.p_total_cd) for r, f in zip(records, fits)]
    pairs += [(r.p_attack_observed, f.prediction.p_attack_d_alone) for r, f in zip(records, fits)]
    if pairs:
        out += f"\nmean relative error vs observed (P_T and P(A)): {100 * mean_relative_error(pairs):.2f}%\n"
    for n in notes:
        out += f"warning: {n}\n"
    return out, EXIT_OK


def cmd_predict(config: RunConfig, p_g: float, h_g: float, h_b: float) -> tuple[str, int]:
    if not 0.0 <= p_g <= 1.0:
        raise UsageError(f"--pg must lie in [0, 1], got {p_g}")
    pred = predict(p_g, 1.0 - p_g, HamiltonianParams(h_g, h_b, config.t), config.w_cd, config.w_d)
    values = {**asdict(pred), "interference": pred.interference}
    if config.format == "json":
        return json.dumps({"p_g": p_g, "h_g": h_g, "h_b": h_b, "t": config.t, **values}, indent=2) + "\n", EXIT_OK
    if config.format == "csv":
        return ",".join(values) + "\n" + ",".join(repr(v) for v in values.values()) + "\n", EXIT_OK
    labels = {
        "p_attack_given_good": "P(A|G)", "p_attack_given_bad": "P(A|B)",
        "p_uncertain_given_good": "P(U|G)", "p_uncertain_given_bad": "P(U|B)",
        "p_total_cd": "P_T", "p_attack_d_alone": "P(A)", "interference": "P(A)-P_T",
    }
    return "".join(f"{labels[k]:<9} = {v:.4f}\n" for k, v in values.items()), EXIT_OK


def _t4_rows(config: RunConfig):
    records = data.narrow_experiments()
    fits, _ = _fit_all(records, config)
    rows = []
    for r, f in zip(records, fits):
        ref = data.reference(r.source_id, data.Model.QDB)
        p = f.prediction
        d_t, d_a = p.p_total_cd - ref.p_t, p.p_attack_d_alone - ref.p_attack
        ok = abs(d_t) <= REPRO_TOL and abs(d_a) <= REPRO_TOL
        rows.append((r, f, ref, d_t, d_a, ok))
    return rows


def cmd_reproduce(config: RunConfig, table: str) -> tuple[str, int]:
    if table not in ("t4", "t5"):
        raise UsageError(f"unknown table {table!r}; choose t4 or t5")
    rows = _t4_rows(config)
    all_ok = all(row[-1] for row in rows)

    if config.format == "json":
        payload = []
        for r, f, ref, d_t, d_a, ok in rows:
            entry = {
                "source_id": r.source_id,
                "computed": {"p_t": f.prediction.p_total_cd, "p_attack": f.prediction.p_attack_d_alone},
                "published_qdb": {"p_t": ref.p_t, "p_attack": ref.p_attack},
                "delta": {"p_t": d_t, "p_attack": d_a},
                "pass": ok,
            }
            if table == "t5":
                m = markov_total_probability(r.p_g, r.p_attack_given_good, r.p_b, r.p_attack_given_bad)
                entry["observed"] = {"p_t": r.p_t_observed, "p_attack": r.p_attack_observed}
                entry["markov_computed"] = {"p_t": m, "p_attack": m}
                for model in (data.Model.BAE, data.Model.MARKOV_BA):
                    ref_m = data.reference(r.source_id, model)
                    entry[f"stored_{model.value}"] = {"p_t": ref_m.p_t, "p_attack": ref_m.p_attack}
            payload.append(entry)
        out = json.dumps({"table": table, "tolerance": REPRO_TOL, "rows": payload, "all_pass": all_ok}, indent=2) + "\n"
    elif table == "t4":
        header = ["source", "P(A|G)", "P(A|B)", "P_T", "P_T pub", "dP_T", "P(A)", "P(A) pub", "dP(A)", "status"]
        body = [[r.source_id, f.prediction.p_attack_given_good, f.prediction.p_attack_given_bad,
                 f.prediction.p_total_cd, ref.p_t, abs(d_t), f.prediction.p_attack_d_alone, ref.p_attack,
                 abs(d_a), "PASS" if ok else "FAIL"] for r, f, ref, d_t, d_a, ok in rows]
        out = _emit(config, header, body) + (f"\ntolerance +/-{REPRO_TOL} on P_T and P(A)\n" if config.format == "table" else "")
    else:
        header = ["source", "model", "P_T", "P(A)", "P(A)-P_T", "status"]
        body = []
        for r, f, ref, d_t, d_a, ok in rows:
            m = markov_total_probability(r.p_g, r.p_attack_given_good, r.p_b, r.p_attack_given_bad)
            bae = data.reference(r.source_id, data.Model.BAE)
            mba = data.reference(r.source_id, data.Model.MARKOV_BA)
            p = f.prediction
            body += [
                [r.source_id, "Observed", r.p_t_observed, r.p_attack_observed, r.p_attack_observed - r.p_t_observed, ""],
                [r.source_id, "QDB (computed)", p.p_total_cd, p.p_attack_d_alone, p.interference, "PASS" if ok else "FAIL"],
                [r.source_id, "QDB (published)", ref.p_t, ref.p_attack, ref.p_attack - ref.p_t, ""],
                [r.source_id, "Markov (computed)", m, m, 0.0, ""],
                [r.source_id, "Markov BA (stored)*", mba.p_t, mba.p_attack, 0.0, ""],
                [r.source_id, "Quantum BAE (stored)", bae.p_t, bae.p_attack, bae.p_attack - bae.p_t, ""],
            ]
        out = _emit(config, header, body)
        if config.format == "table":
            out += ("\n* stored Markov BA values are opaque published numbers; they are not"
                    " reproducible from the observed conditionals by total probability.\n")
    return out, EXIT_OK if all_ok else EXIT_REPRO_FAIL


def _emit(config, header, body) -> str:
    if config.format == "csv":
        lines = [",".join(header)]
        lines += [",".join(c if isinstance(c, str) else repr(float(c)) for c in row) for row in body]
        return "\n".join(lines) + "\n"
    return render_table(header, body)


def parse_mass_spec(spec: str) -> MassFunction:
    """Parse ``"A,W:0.6 A:0.4"`` into a mass function."""
    masses = []
    pos = 0
    for k, token in enumerate(spec.split()):
        pos = spec.index(token, pos)
        where = f"token {k + 1} ({token!r}) at column {pos + 1}"
        if token.count(":") != 1:
            raise UsageError(f"{where}: expected 'labels:mass'")
        labels, mass = token.split(":")
        subset = [x.strip() for x in labels.split(",")]
        if not labels or any(not x for x in subset):
            raise UsageError(f"{where}: empty label")
        try:
            value = float(mass)
        except ValueError:
            raise UsageError(f"{where}: mass {mass!r} is not a number") from None
        masses.append((subset, value))
        pos += len(token)
    if not masses:
        raise UsageError("empty mass specification")
    try:
        return MassFunction(masses)
    except ValueError as exc:
        raise UsageError(f"invalid mass function: {exc}") from None


def cmd_ppt(config: RunConfig, spec: str) -> tuple[str, int]:
    bet = pignistic_transform(parse_mass_spec(spec))
    if config.format == "json":
        return json.dumps(bet, indent=2) + "\n", EXIT_OK
    if config.format == "csv":
        return "label,probability\n" + "".join(f"{k},{v!r}\n" for k, v in bet.items()), EXIT_OK
    return " ".join(f"{k}={v:.4f}" for k, v in bet.items()) + "\n", EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", dest="input_path")
    common.add_argument("-o", "--output", dest="output_path")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--wcd", dest="w_cd", type=float, default=CD_UNCERTAIN_WEIGHT,
                        help="uncertain weight in the C-D reported conditional (default 0.25)")
    common.add_argument("--wd", dest="w_d", type=float, default=D_ALONE_UNCERTAIN_WEIGHT,
                        help="uncertain weight in the D-alone measurement (default 0.5)")
    common.add_argument("--time", dest="t", type=float, default=DEFAULT_TIME)
    common.add_argument("--hmin", type=float, default=H_RANGE[0])
    common.add_argument("--hmax", type=float, default=H_RANGE[1])
    common.add_argument("--grid-step", type=float, default=GRID_STEP)

    parser = _Parser(prog="qdb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("fit", parents=[common], help="fit h_G, h_B to each record")
    p = sub.add_parser("predict", parents=[common], help="predict for given parameters")
    p.add_argument("--pg", type=float, required=True)
    p.add_argument("--hg", type=float, required=True)
    p.add_argument("--hb", type=float, required=True)
    p = sub.add_parser("reproduce", parents=[common], help="compare against published tables")
    p.add_argument("table", choices=("t4", "t5"))
    p = sub.add_parser("ppt", parents=[common], help="pignistic transform of a mass function")
    p.add_argument("spec", help="focal elements as 'labels:mass' pairs, e.g. 'A,W:0.6 A:0.4'")
    return parser


def run(argv=None) -> tuple[str, int, str | None]:
    """Parse ``argv`` and execute; returns ``(report, exit_code, output_path)``."""
    args = build_parser().parse_args(argv)
    config = RunConfig(
        command=args.command, input_path=args.input_path, output_path=args.output_path,
        format=args.format, w_cd=args.w_cd, w_d=args.w_d, t=args.t,
        h_range=(args.hmin, args.hmax), grid_step=args.grid_step,
    )
    if args.command == "fit":
        text, code = cmd_fit(config)
    elif args.command == "predict":
        text, code = cmd_predict(config, args.pg, args.hg, args.hb)
    elif args.command == "reproduce":
        text, code = cmd_reproduce(config, args.table)
    else:
        text, code = cmd_ppt(config, args.spec)
    return text, code, config.output_path


def main(argv=None) -> int:
    try:
        text, code, output_path = run(argv)
        if output_path:
            with open(output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (UsageError, ValueError, OSError) as exc:
        print(f"qdb: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return code


if __name__ == "__main__":
    sys.exit(main())
