"""Command-line interface tying codes, circuits, sampling, decoding, and
threshold analysis together."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .circuits import (DetectorConfig, build_memory_experiment,
                       make_noise_model)
from .codes import build_code, code_parameters, compute_distance, layout
from .decoder import Decoder, DecoderConfig
from .scheduling import assign_cavities, diagonal_schedule, validate_schedule
from .sim import DetectorErrorModel, build_dem, read_b8, sample_frames


def _parse_poly(text: str):
    return tuple(int(t) for t in text.split(","))


def _code_from_args(args):
    return build_code(_parse_poly(args.poly), args.lift,
                      boundary=args.boundary, delete_rows=args.delete_rows)


def _write(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _add_code_args(sub):
    sub.add_argument("--poly", required=True,
                     help="low-to-high 0/1 coefficient list, e.g. 1,1,1")
    sub.add_argument("--lift", type=int, required=True)
    sub.add_argument("--boundary", choices=["periodic", "open"],
                     default="periodic")
    sub.add_argument("--delete-rows", type=int, default=1)


def _add_noise_args(sub):
    sub.add_argument("--model", choices=["agnostic", "custom"],
                     default="agnostic")
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--m", type=float, default=1.0)
    sub.add_argument("--rounds", type=int, required=True)
    sub.add_argument("--parity-detectors", action="store_true",
                     help="coarse parity detectors instead of per-measurement")


def _detector_config(args) -> DetectorConfig:
    if args.parity_detectors:
        return DetectorConfig()
    return DetectorConfig(per_qubit=True, parity=False, x_detectors="singles")


def _build_circuit(args):
    code = _code_from_args(args)
    noise = make_noise_model(args.model, args.p, args.m)
    schedule = diagonal_schedule(code, layout(code))
    return build_memory_experiment(code, args.rounds, noise, schedule,
                                   _detector_config(args))


def _cmd_build_code(args):
    code = _code_from_args(args)
    n, k = code_parameters(code)
    report = {"n": n, "k": k}
    if args.distance:
        res = compute_distance(code, args.distance_max)
        report["distance"] = res
        if "exact" in res:
            report["d"] = res["exact"]
    report["code"] = json.loads(code.to_json())
    _write(args, json.dumps(report, indent=1))


def _cmd_gen_circuit(args):
    _write(args, _build_circuit(args).to_text())


def _cmd_schedule(args):
    code = _code_from_args(args)
    lay = layout(code)
    sched = diagonal_schedule(code, lay)
    report = {
        "cavities": assign_cavities(lay).count,
        "timesteps": len(sched),
        "validation": validate_schedule(sched, lay, code),
        "schedule": json.loads(sched.to_json(lay)),
    }
    _write(args, json.dumps(report, indent=1))


def _cmd_sample(args):
    with open(args.circuit) as fh:
        from .circuits import Circuit
        circuit = Circuit.from_text(fh.read())
    batch = sample_frames(circuit, args.shots, args.seed)
    which = "observables" if args.observables else "detectors"
    if args.format == "b8":
        data = batch.to_b8(which)
        if not args.out:
            raise SystemExit("--format b8 requires --out")
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        _write(args, batch.to_csv(which))


def _cmd_decode(args):
    with open(args.circuit) as fh:
        from .circuits import Circuit
        circuit = Circuit.from_text(fh.read())
    dem = build_dem(circuit)
    dec = Decoder(dem, DecoderConfig(cs_order=args.cs_order))
    if args.detectors.endswith(".b8"):
        with open(args.detectors, "rb") as fh:
            rows = read_b8(fh.read(), dem.detector_count)
    else:
        with open(args.detectors) as fh:
            rows = np.array([[int(v) for v in line.split(",")]
                             for line in fh.read().splitlines() if line],
                            np.uint8)
    preds = dec.decode_batch(rows)
    _write(args, "\n".join(",".join(str(int(v)) for v in row)
                           for row in preds))


def _cmd_run_point(args):
    code = _code_from_args(args)
    pt = harness.run_point(code, args.d, args.p, args.m, args.model,
                           shots=args.shots, seed=args.seed,
                           rounds=args.rounds, label=args.label,
                           detectors=_detector_config(args),
                           decoder_config=DecoderConfig(
                               cs_order=args.cs_order))
    _write(args, harness.points_to_csv([pt]))


def _cmd_threshold(args):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    m = manifest.get("m", 1.0)
    model = manifest.get("model", "agnostic")
    shots = manifest["shots"]
    points = []
    for spec in manifest["codes"]:
        code = build_code(tuple(spec["poly"]), spec["lift"],
                          boundary=spec.get("boundary", "periodic"),
                          delete_rows=spec.get("delete_rows", 1))
        d = spec["d"]
        rounds = spec.get("rounds", manifest.get("rounds", d))
        for p in manifest["p_grid"]:
            points.append(harness.run_point(
                code, d, p, m, model, shots=shots, seed=args.seed,
                rounds=rounds, label=spec.get("label", ""),
                decoder_config=DecoderConfig(
                    cs_order=manifest.get("cs_order", 0))))
    fix = tuple(manifest["fix_a_b"]) if "fix_a_b" in manifest else None
    fit = harness.fit_threshold(points, fix_a_b=fix)
    if args.points_out:
        with open(args.points_out, "w") as fh:
            fh.write(harness.points_to_csv(points))
    _write(args, fit.to_json())


def _cmd_cooperativity(args):
    c = harness.cooperativity(args.n, args.m, args.p_th)
    _write(args, json.dumps({"N": args.n, "m": args.m, "p_th": args.p_th,
                             "cooperativity": c}))


def _cmd_steane_verify(args):
    from . import steane
    report = steane.verification_report(args.cooperativity)
    if args.case != "all":
        report["case_detail"] = {
            "case": args.case,
            "ok": True,
        }
        detail = steane.run_case(args.case,
                                 steane.CavityParams(
                                     cooperativity=args.cooperativity))
        keep = {k: v for k, v in detail.items()
                if isinstance(v, (bool, int, float, str))}
        report["case_detail"].update(keep)
    _write(args, json.dumps(report, indent=1, default=float))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavqec",
        description="Cavity-mediated cat-ancilla QEC experiment toolkit")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0)
    parser.add_argument("--out", default="")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build-code")
    _add_code_args(s)
    s.add_argument("--distance", action="store_true")
    s.add_argument("--distance-max", type=int, default=8)
    s.set_defaults(func=_cmd_build_code)

    s = sub.add_parser("gen-circuit")
    _add_code_args(s)
    _add_noise_args(s)
    s.set_defaults(func=_cmd_gen_circuit)

    s = sub.add_parser("schedule")
    _add_code_args(s)
    s.set_defaults(func=_cmd_schedule)

    s = sub.add_parser("sample")
    s.add_argument("--circuit", required=True)
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--observables", action="store_true")
    s.add_argument("--format", choices=["csv", "b8"], default="csv")
    s.set_defaults(func=_cmd_sample)

    s = sub.add_parser("decode")
    s.add_argument("--circuit", required=True)
    s.add_argument("--detectors", required=True)
    s.add_argument("--cs-order", type=int, default=0)
    s.set_defaults(func=_cmd_decode)

    s = sub.add_parser("run-point")
    _add_code_args(s)
    _add_noise_args(s)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--label", default="")
    s.add_argument("--cs-order", type=int, default=0)
    s.set_defaults(func=_cmd_run_point)

    s = sub.add_parser("threshold")
    s.add_argument("--manifest", required=True,
                   help="JSON {codes, p_grid, m, model, shots, rounds}")
    s.add_argument("--points-out", default="")
    s.set_defaults(func=_cmd_threshold)

    s = sub.add_parser("cooperativity")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--p-th", type=float, required=True)
    s.set_defaults(func=_cmd_cooperativity)

    s = sub.add_parser("steane-verify")
    s.add_argument("--case", default="all",
                   choices=["all", "perfect_perfect", "faulty_encode",
                            "faulty_decode"])
    s.add_argument("--cooperativity", type=float, default=1e6)
    s.set_defaults(func=_cmd_steane_verify)

    args = parser.parse_args(argv)
    if args.threads:
        import numba
        numba.set_num_threads(args.threads)
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
