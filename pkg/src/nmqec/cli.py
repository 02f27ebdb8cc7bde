"""Command-line entry point ``qec``.

Subcommands
-----------
sweep         worst-case fidelity along a scenario grid
divisibility  Bloch-matrix eigenvalue tracks and P-divisibility violations
check         trace preservation, positivity, unitality and Knill-Laflamme reports
fit           least-squares polynomial fit of a fidelity CSV

Exit codes: 0 success, 1 failed check, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from nmqec.analysis.bloch import unitality_defect
from nmqec.analysis.fitting import poly_eval, poly_fit
from nmqec.channel import compose, intermediate_map, is_cp
from nmqec.codes import codeword_overlaps, kl_overlaps
from nmqec.errors import ConfigError, QECError
from nmqec.noise import ad_kraus, ad_noise, g_of_t, gamma_of_t
from nmqec.recovery import noise_image
from nmqec.scenarios import (
    BUILTINS,
    Scenario,
    ScenarioResult,
    _Runner,
    builtin,
    load_scenario_file,
    run,
)

FIDELITY_HEADER = ["t", "gamma", "scheme", "f2_min", "theta_min", "phi_min"]
EIGS_HEADER = ["t", "k", "lambda_re", "lambda_im", "dlambda_dt", "is_violation"]
VIOLATIONS_HEADER = ["scheme", "k", "t_start", "t_end", "complex_pair"]
KL_HEADER = ["gamma", "code", "op", "overlap_0L", "overlap_1L", "alpha", "kl_residual"]
CHECK_HEADER = ["check", "scheme", "t", "gamma", "value", "tolerance", "status"]
FIT_HEADER = ["scheme", "degree", "power", "coefficient"]

TP_TOL = 1e-8
CP_TOL = 1e-10
UNITAL_TOL = 1e-6


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _write_csv(path: Path, header, rows) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            n += 1
    return n


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("QEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QEC_THREADS must be an integer, got {env!r}") from None
    return 1


def _scenario(args) -> Scenario:
    if bool(args.builtin) == bool(args.scenario):
        raise ConfigError("give exactly one of --builtin or --scenario")
    if args.builtin:
        return builtin(args.builtin, args.set)
    return load_scenario_file(args.scenario, args.set)


def _outdir(args) -> Path:
    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def write_fidelity(result: ScenarioResult, out: Path) -> Path:
    path = out / f"{result.scenario.name}_fidelity.csv"
    _write_csv(path, FIDELITY_HEADER, result.fidelity_rows())
    return path


def write_kl(s: Scenario, gammas, out: Path) -> Path:
    rows = []
    for g in gammas:
        for sch in s.schemes:
            noise = ad_noise(float(g), sch.code.n_phys)
            alpha, resid = kl_overlaps(sch.code, noise)
            n = sch.code.n_phys
            for i, op in enumerate(noise.ops):
                label = np.base_repr(i, 2).zfill(n)
                ov = codeword_overlaps(sch.code, op)
                rows.append((g, sch.name, label, ov[0], ov[-1], alpha[i, i].real, resid[i, i]))
    path = out / f"{s.name}_kl.csv"
    _write_csv(path, KL_HEADER, rows)
    return path


def write_fit(result: ScenarioResult, out: Path) -> Path:
    s = result.scenario
    rows = []
    for sch in s.schemes:
        coef = poly_fit(result.gammas, result.f2(sch.name), s.fit_degree, s.fit_constrain_f0)
        rows.extend((sch.name, s.fit_degree, p, c) for p, c in enumerate(coef))
    path = out / f"{s.name}_fit.csv"
    _write_csv(path, FIT_HEADER, rows)
    return path


def write_divisibility(result: ScenarioResult, out: Path) -> list[Path]:
    s = result.scenario
    axis = result.times if s.is_time_sweep else result.gammas
    paths = []
    summary = []
    for sch in s.schemes:
        rep = result.divisibility(sch.name)
        tracks = rep.nonzero_tracks() if s.drop_zero_eigenvalues else rep.tracks
        rows = []
        for i, t in enumerate(axis):
            for tr in tracks:
                lam = tr.values[i]
                rows.append((t, tr.k, lam.real, lam.imag, tr.derivative[i], bool(tr.violation[i])))
        path = out / f"{s.name}_{sch.name}_eigs.csv"
        _write_csv(path, EIGS_HEADER, rows)
        paths.append(path)
        for tr in tracks:
            summary.extend((sch.name, tr.k, a, b, tr.complex_pair) for a, b in tr.intervals)
    path = out / f"{s.name}_violations.csv"
    _write_csv(path, VIOLATIONS_HEADER, summary)
    paths.append(path)
    return paths


def cmd_sweep(args) -> int:
    s = _scenario(args)
    out = _outdir(args)
    result = run(s, threads=_threads(args.threads))
    print(f"wrote {write_fidelity(result, out)}")
    if "kl_overlaps" in s.outputs:
        print(f"wrote {write_kl(s, result.gammas, out)}")
    if "poly_fit" in s.outputs:
        print(f"wrote {write_fit(result, out)}")
    if "m_eigencurves" in s.outputs or "divisibility_report" in s.outputs:
        for p in write_divisibility(result, out):
            print(f"wrote {p}")
    return 0


def cmd_divisibility(args) -> int:
    s = _scenario(args)
    if "m_eigencurves" not in s.outputs:
        raise ConfigError(f"scenario {s.name!r} does not request m_eigencurves")
    out = _outdir(args)
    result = run(s, threads=_threads(args.threads))
    for p in write_divisibility(result, out):
        print(f"wrote {p}")
    for sch in s.schemes:
        rep = result.divisibility(sch.name)
        spans = ", ".join(f"[{fmt(a)}, {fmt(b)}]" for a, b in rep.intervals) or "none"
        print(f"{sch.name}: violations {spans}")
    return 0


def run_checks(s: Scenario) -> list[tuple]:
    """Rows ``(check, scheme, t, gamma, value, tolerance, status)``.

    ``status`` is ``pass``/``fail`` for enforced checks and ``info``,
    ``skipped`` or ``expected_ncp`` for reported quantities.
    """
    grid = s.grid()
    if s.is_time_sweep:
        times = grid
        gammas = np.array([gamma_of_t(t, s.noise) for t in times])
    else:
        times = np.full(len(grid), np.nan)
        gammas = grid
    runner = _Runner(s)
    rows = []
    max_rank: dict[str, int] = {}

    def add(check, scheme, i, value, tol, status):
        rows.append((check, scheme, times[i], gammas[i], value, tol, status))

    def verdict(ok):
        return "pass" if ok else "fail"

    for i, g in enumerate(gammas):
        single = ad_kraus(float(g))
        ok, lam = is_cp(single)
        add("noise_cp", "-", i, lam, -CP_TOL, verdict(ok))
        for sch in s.schemes:
            noise = ad_noise(float(g), sch.code.n_phys)
            add("noise_tp", sch.name, i, noise.tp_residual(), TP_TOL, verdict(noise.tp_residual() <= TP_TOL))
            rec = runner.recovery_at(sch, noise, times[i])
            if rec is None:
                continue
            add("recovery_tp", sch.name, i, rec.tp_residual(), TP_TOL, verdict(rec.tp_residual() <= TP_TOL))
            neg = int(np.sum(rec.signs < 0))
            add("recovery_negative_kraus", sch.name, i, neg, 0, verdict(neg == 0))
            channel = compose(rec, noise, check_tp=False)
            res = channel.tp_residual()
            add("composite_tp", sch.name, i, res, TP_TOL, verdict(res <= TP_TOL))
            defect = unitality_defect(channel, sch.code)
            if sch.recovery.kind == "petz" and sch.recovery.adaptation == "exact":
                rank = np.linalg.matrix_rank(noise_image(sch.code, noise), tol=1e-12)
                full = rank >= max_rank.setdefault(sch.name, _max_rank(sch.code))
                add("unitality", sch.name, i, defect, UNITAL_TOL, verdict(defect <= UNITAL_TOL) if full else "skipped")
            else:
                add("unitality", sch.name, i, defect, UNITAL_TOL, "info")
        for sch in s.schemes:
            if sch.code.n_phys < 2:
                continue
            noise = ad_noise(float(g), sch.code.n_phys)
            ov = codeword_overlaps(sch.code, noise.ops[0])
            add("kl_overlap_0L", sch.code.name, i, ov[0], np.nan, "info")
            add("kl_overlap_1L", sch.code.name, i, ov[1], np.nan, "info")

    if s.is_time_sweep:
        for i in range(1, len(times)):
            if abs(g_of_t(times[i - 1], s.noise)) < 1e-9:
                continue
            inter = intermediate_map(ad_kraus(gammas[i]), ad_kraus(gammas[i - 1]))
            ok, lam = is_cp(inter)
            add("intermediate_cp", "-", i, lam, -CP_TOL, "pass" if ok else "expected_ncp")
    return rows


def _max_rank(code) -> int:
    # rank of E[P] for damping on every qubit at generic strength
    return int(np.linalg.matrix_rank(noise_image(code, ad_noise(0.37, code.n_phys)), tol=1e-12))


def cmd_check(args) -> int:
    s = _scenario(args)
    out = _outdir(args)
    rows = run_checks(s)
    path = out / f"{s.name}_check.csv"
    _write_csv(path, CHECK_HEADER, rows)
    failed = [r for r in rows if r[-1] == "fail"]
    counts = {}
    for r in rows:
        counts[r[-1]] = counts.get(r[-1], 0) + 1
    print(f"wrote {path}")
    print(", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    for r in failed[:20]:
        print("FAIL " + " ".join(fmt(v) for v in r))
    return 1 if failed else 0


def _read_fidelity_csv(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"gamma", "scheme", "f2_min"} <= set(reader.fieldnames):
                raise ConfigError(f"{path}: not a fidelity CSV (need gamma, scheme, f2_min columns)")
            data: dict[str, list] = {}
            for row in reader:
                data.setdefault(row["scheme"], []).append((float(row["gamma"]), float(row["f2_min"])))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return {k: (np.array([g for g, _ in v]), np.array([f for _, f in v])) for k, v in data.items()}


def cmd_fit(args) -> int:
    if args.input:
        if args.builtin or args.scenario:
            raise ConfigError("give either --input or a scenario, not both")
        data = _read_fidelity_csv(args.input)
        stem = Path(args.input).stem.removesuffix("_fidelity")
    else:
        s = _scenario(args)
        result = run(s, threads=_threads(args.threads))
        data = {sch.name: (result.gammas, result.f2(sch.name)) for sch in s.schemes}
        stem = s.name
    if args.scheme:
        missing = [k for k in args.scheme if k not in data]
        if missing:
            raise ConfigError(f"unknown scheme(s) {missing}; available {sorted(data)}")
        data = {k: data[k] for k in args.scheme}
    out = _outdir(args)
    rows = []
    for name, (x, y) in data.items():
        coef = poly_fit(x, y, args.degree, args.constrain_f0)
        rows.extend((name, args.degree, p, c) for p, c in enumerate(coef))
        terms = " ".join(fmt(c) for c in coef)
        print(f"{name}: coefficients [{terms}]  f(1) = {fmt(float(poly_eval(coef, 1.0)))}")
    path = out / f"{stem}_fit.csv"
    _write_csv(path, FIT_HEADER, rows)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qec", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, required=True):
        p.add_argument("--builtin", choices=sorted(BUILTINS), help="builtin scenario name")
        p.add_argument("--scenario", help="path to a scenario JSON file")
        p.add_argument("-o", "--output", default=".", help="output directory (default: current)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scenario field, e.g. time.steps=3 (repeatable)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $QEC_THREADS or 1)")

    for name, func, helptext in (
        ("sweep", cmd_sweep, "worst-case fidelity sweep"),
        ("divisibility", cmd_divisibility, "Bloch-matrix eigenvalues and P-divisibility"),
        ("check", cmd_check, "consistency checks"),
    ):
        p = sub.add_parser(name, help=helptext)
        scenario_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("fit", help="polynomial fit of F2_min against gamma")
    scenario_args(p)
    p.add_argument("--input", help="fidelity CSV written by 'qec sweep'")
    p.add_argument("--scheme", action="append", help="restrict to this scheme (repeatable)")
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--constrain-f0", dest="constrain_f0", action=argparse.BooleanOptionalAction, default=True,
                   help="pin the constant term to 1 (default on)")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QECError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
