"""Command-line front end: simulate scenarios, estimate captures, synthesize
attack waveforms, run Monte-Carlo sweeps and summarize results."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .attacks import AttackerState, FnConfig, fn_frame, fp_frame, jam_frame, translation_frame
from .channel import LinkBudget, noise_power_dbm
from .estimation import NoFrameDetected, VictimEstimate, VictimSensor, detect_frame_start
from .iqfile import read_iq, write_iq
from .scenario import ScenarioError, load_scenario, resolve_victim
from .waveforms import SPEED_OF_LIGHT, derived_metrics


def _cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    result = harness.run_scenario(sc)
    out = result.to_dict()
    if args.output:
        harness.write_json(out, args.output)
        print(f"wrote {args.output}")
    else:
        json.dump(out, sys.stdout, sort_keys=True, indent=2)
        print()
    for f in result.frames:
        status = "attack" if f.attacked else ("skipped" if f.attack_skipped else "-")
        clusters = ", ".join(
            f"({c['range_m']:.1f} m, {c['velocity_mps']:+.1f} m/s)"
            for c in f.clusters) or "none"
        print(f"frame {f.index:2d} [{status:7s}] clusters: {clusters}")
    return 0


def _cmd_estimate(args) -> int:
    buf = read_iq(args.capture)
    budget = LinkBudget()
    floor = args.noise_floor_dbm if args.noise_floor_dbm is not None \
        else noise_power_dbm(buf.rate, budget)
    sensor = VictimSensor(noise_floor_db=floor)
    # walk the capture, consuming one detected frame at a time
    cursor = 0
    hop = int(round(sensor.capture_seconds * buf.rate))
    from .waveforms import IQBuffer
    while cursor + hop <= len(buf.samples):
        chunk = IQBuffer(buf.samples[cursor:], buf.rate,
                         t0=buf.t0 + cursor / buf.rate)
        try:
            idx = detect_frame_start(chunk, floor)
        except NoFrameDetected:
            break
        sensor.observe(IQBuffer(chunk.samples[: idx + hop + 4096], chunk.rate,
                                t0=chunk.t0))
        cursor += idx + hop
    est = sensor.estimate
    if est is None:
        print("no victim frames found in the capture", file=sys.stderr)
        return 1
    record = est.to_dict()
    if args.output:
        harness.write_json(record, args.output)
        print(f"wrote {args.output}")
    else:
        json.dump(record, sys.stdout, sort_keys=True, indent=2)
        print()
    return 0


def _cmd_attack(args) -> int:
    est = VictimEstimate.from_dict(json.loads(Path(args.estimate).read_text()))
    spec = json.loads(Path(args.attack).read_text())
    kind = spec.get("type", "fp")
    cfg = resolve_victim(spec.get("victim", "table4"))
    budget = LinkBudget()
    atk = AttackerState(spec.get("d_atk", 75.0), spec.get("v_atk", 0.0))
    fncfg = FnConfig(**spec.get("fn", {}))
    t0 = spec.get("t0", 0.0)
    from .attacks import SpoofTarget
    if kind == "fp":
        buf, clamped = fp_frame(est, SpoofTarget(spec["d_spoof"], spec["v_spoof"]),
                                atk, budget, cfg, t0)
    elif kind == "fn":
        buf, clamped = fn_frame(est, SpoofTarget(spec["d_spoof"], spec["v_spoof"]),
                                atk, fncfg, budget, cfg, t0)
    elif kind == "translation":
        buf, clamped = translation_frame(
            est, SpoofTarget(spec["real_d"], spec["real_v"]),
            SpoofTarget(spec["d_spoof"], spec["v_spoof"]), atk, fncfg, budget,
            cfg, t0)
    elif kind == "jam":
        buf, clamped = jam_frame(est, spec.get("range_span", 1000.0),
                                 spec.get("velocity_span", 200.0), atk, budget,
                                 cfg, t0)
    else:
        print(f"unknown attack type {kind!r}", file=sys.stderr)
        return 2
    write_iq(args.output, buf)
    note = " (amplitude clamped at full power)" if clamped else ""
    print(f"wrote {args.output}: {len(buf)} samples at {buf.rate:.0f} Hz{note}")
    return 0


def _cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.mode == "accuracy":
        report = harness.spoof_accuracy_sweep(sc, args.trials)
        rows = report.pop("rows")
        cdf = report.pop("cdf")
        harness.write_json(report, outdir / "accuracy_summary.json")
        harness.write_rows_csv(rows, outdir / "accuracy_trials.csv")
        harness.write_cdf_csv(cdf["range_error_m"], outdir / "cdf_range_error.csv")
        harness.write_cdf_csv(cdf["velocity_error_mps"],
                              outdir / "cdf_velocity_error.csv")
        print(f"success rate {report['success_rate']:.3f} over "
              f"{report['n_frames']} attack frames")
    else:
        report = harness.pd_pfa_sweep(sc, args.trials)
        rows = {m: report["modes"][m].pop("rows") for m in report["modes"]}
        harness.write_json(report, outdir / "pd_pfa_summary.json")
        for mode, r in rows.items():
            harness.write_rows_csv(r, outdir / f"pd_pfa_trials_{mode}.csv")
        for mode in report["modes"]:
            agg = report["modes"][mode]
            print(f"{mode:5s}: PD {agg['aggregate_pd']:.3f}  "
                  f"PFA {agg['aggregate_pfa']:.3f}")
    print(f"wrote reports to {outdir}")
    return 0


def _cmd_report(args) -> int:
    directory = Path(args.results)
    found = False
    for name in ("accuracy_summary.json", "pd_pfa_summary.json"):
        p = directory / name
        if p.exists():
            found = True
            print(f"== {name}")
            data = json.loads(p.read_text())
            json.dump(data, sys.stdout, sort_keys=True, indent=2)
            print()
    if not found:
        print(f"no report files found under {directory}", file=sys.stderr)
        return 1
    return 0


def _cmd_metrics(args) -> int:
    victim = json.loads(args.victim) if args.victim.lstrip().startswith("{") \
        else args.victim
    m = derived_metrics(resolve_victim(victim))
    print(f"d_res  = {m.d_res:.4f} m")
    print(f"d_max  = {m.d_max:.2f} m")
    print(f"v_res  = {m.v_res:.4f} m/s")
    print(f"v_max  = {m.v_max:.4f} m/s")
    print(f"lambda = {m.wavelength:.6f} m")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fmcwlab",
        description="FMCW radar attack laboratory: simulate, estimate, attack, evaluate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario end to end")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("-o", "--output", help="write the result JSON here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate victim parameters from an IQ capture")
    p.add_argument("capture", help="IQ capture file")
    p.add_argument("--noise-floor-dbm", type=float, default=None)
    p.add_argument("-o", "--output", help="write the estimate JSON here")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("attack", help="synthesize an attack frame from an estimate")
    p.add_argument("estimate", help="estimate JSON file")
    p.add_argument("attack", help="attack spec JSON file")
    p.add_argument("-o", "--output", required=True, help="output IQ file")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep")
    p.add_argument("scenario", help="base scenario JSON file")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", choices=("accuracy", "pdpfa"), default="accuracy")
    p.add_argument("-o", "--output", default="sweep-results")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="print summaries from a results directory")
    p.add_argument("results", help="directory written by sweep")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("metrics", help="closed-form metrics for a preset")
    p.add_argument("victim", help="preset name, e.g. table4 or table2-C")
    p.set_defaults(func=_cmd_metrics)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
