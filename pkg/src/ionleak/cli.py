"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 data error, 4 network error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .emitsim import EmissionConfig, config_to_text, load_circuit, load_config, synthesize
from .errors import DataError, NetworkError
from .ionet import capture_stream, read_trace, serve_stream, write_trace
from .reconstruct import (
    AddressingTable,
    BaselineProfile,
    ClassifierConfig,
    StatsTable,
    analyze_trace,
    assign_ions,
    default_addressing_table,
    profile_from_trace,
)
from .reconstruct.stats import CSV_COLUMNS
from .sigproc import AOM_BAND_HZ, DEFAULT_ALPHA, dealias_candidates

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NETWORK = 0, 2, 3, 4
PGM_DYNAMIC_RANGE_DB = 80.0

log = logging.getLogger("ionleak")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def cmd_simulate(args) -> int:
    circuit = load_circuit(args.circuit)
    cfg = load_config(args.config) if args.config != "-" else EmissionConfig()
    trace, truth = synthesize(circuit, cfg, seed=args.seed)
    clipped = write_trace(trace, args.out, description=args.description or f"simulated {Path(args.circuit).name}")
    if clipped:
        log.warning("%d samples clipped", clipped)
    if args.truth:
        _write_json(Path(args.truth), truth.to_dict())
    log.info("wrote %d samples (%d shots) to %s", len(trace), circuit.n_shots, args.out)
    return EXIT_OK


def cmd_init_config(args) -> int:
    text = config_to_text(EmissionConfig())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_profile(args) -> int:
    trace = read_trace(args.trace)
    profile = profile_from_trace(trace, alpha=args.alpha, gap_threshold_s=args.gap_ms * 1e-3)
    _write_json(Path(args.out), profile.to_dict())
    return EXIT_OK


def _addressing_table(args, bin_hz: float) -> AddressingTable:
    if not args.addressing_mhz:
        return default_addressing_table(bin_hz)
    freqs = [float(v) * 1e6 for v in args.addressing_mhz.split(",") if v.strip()]
    return AddressingTable(tuple(freqs), (bin_hz,) * len(freqs))


def _spectrogram_db(power: np.ndarray) -> np.ndarray:
    peak = float(power.max())
    floor = peak * 1e-12 if peak > 0 else 1e-30
    return 10 * np.log10(power + floor)


def write_pgm(path: Path, analysis) -> None:
    """8-bit log-power image, high frequencies on top, pulse boxes at 255."""
    spec = analysis.detection.spectrogram
    db = _spectrogram_db(spec.power)
    top = db.max()
    img = np.clip((db - (top - PGM_DYNAMIC_RANGE_DB)) / PGM_DYNAMIC_RANGE_DB * 254, 0, 254).astype(np.uint8)
    comps = analysis.detection.components
    for p in analysis.pulses:
        c = comps[p.component_id]
        f0, f1 = int(c.freq_idx.min()), int(c.freq_idx.max())
        t0, t1 = int(c.time_idx.min()), int(c.time_idx.max())
        img[f0:f1 + 1, [t0, t1]] = 255
        img[[f0, f1], t0:t1 + 1] = 255
    img = img[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def write_grid_csv(path: Path, analysis) -> None:
    spec = analysis.detection.spectrogram
    db = _spectrogram_db(spec.power)
    times = spec.frame_times_s()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["freq_hz"] + [f"{t:.9f}" for t in times])
        for f, row in zip(spec.freqs_hz(), db):
            w.writerow([f"{f:.1f}"] + [f"{v:.2f}" for v in row])


def cmd_analyze(args) -> int:
    trace = read_trace(args.trace)
    profile = None
    if args.baseline:
        profile = BaselineProfile.from_dict(json.loads(Path(args.baseline).read_text()))
    table = _addressing_table(args, trace.sample_rate_hz / 2048)
    classifier = ClassifierConfig((2 * math.pi * args.rabi_khz * 1e3,), args.pad_us * 1e-6)
    an = analyze_trace(trace, alpha=args.alpha, gap_threshold_s=args.gap_ms * 1e-3, profile=profile,
                       table=table, classifier=classifier, min_cells=args.min_cells)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "pulses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shot", "region", "ion", "t_start_us", "t_end_us", "duration_us", "center_freq_mhz", "peak_power"])
        for shot in an.shots:
            for p, region, ion in zip(shot.pulses, shot.region_labels, assign_ions(shot.pulses, table)):
                w.writerow([shot.index, region, "" if ion is None else ion, f"{p.t_start_s * 1e6:.3f}",
                            f"{p.t_end_s * 1e6:.3f}", f"{p.duration_s * 1e6:.3f}",
                            f"{p.center_freq_hz * 1e-6:.6f}", f"{p.peak_power:.6g}"])
    _write_json(out / "shots.json", [
        {"index": s.index, "t_start_s": s.t_start_s, "t_end_s": s.t_end_s, "n_pulses": len(s.pulses),
         "regions": {r: s.region_labels.count(r) for r in ("A", "B", "C", "Unknown") if r in s.region_labels}}
        for s in an.shots
    ])
    _write_json(out / "gates.json", [
        {"shot": shot.index, **ev.to_dict()} for shot, evs in zip(an.shots, an.events) for ev in evs
    ])
    stats = an.stats or StatsTable({})
    (out / "stats.csv").write_text(stats.to_csv() if stats.entries else ",".join(CSV_COLUMNS) + "\n")
    write_pgm(out / "spectrogram.pgm", an)
    if args.grid_csv:
        write_grid_csv(out / "spectrogram.csv", an)
    log.info("%d pulses, %d shots, %d gate events", len(an.pulses), len(an.shots), sum(map(len, an.events)))
    return EXIT_OK


def cmd_dealias(args) -> int:
    band = tuple(v * 1e6 for v in args.band) if args.band else AOM_BAND_HZ
    for f in dealias_candidates(args.freq_mhz * 1e6, args.fs_mhz * 1e6, args.kmax, band):
        print(f"{f * 1e-6:.6f}")
    return EXIT_OK


def cmd_stream(args) -> int:
    serve_stream(args.trace, args.port, realtime=args.realtime, host=args.host,
                 sessions=None if args.sessions == 0 else args.sessions)
    return EXIT_OK


def cmd_capture(args) -> int:
    tf = capture_stream(args.host, args.port, duration_s=args.duration, out_path=args.out, timeout=args.timeout)
    log.info("captured %d samples%s", tf.payload.size, " (truncated)" if tf.truncated else "")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ionleak", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a circuit to an RF trace")
    p.add_argument("circuit", help="circuit JSON")
    p.add_argument("config", help="emission config (key = value), or - for defaults")
    p.add_argument("out", help="output .rftrace path")
    p.add_argument("--truth", help="write ground truth JSON here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--description", default="")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("init-config", help="print the default emission config")
    p.add_argument("out", nargs="?")
    p.set_defaults(func=cmd_init_config)

    p = sub.add_parser("profile", help="learn preamble/readout templates from an empty-circuit trace")
    p.add_argument("trace")
    p.add_argument("out")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--gap-ms", type=float, default=1.0)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("analyze", help="detect pulses, shots and gates in a trace")
    p.add_argument("trace")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--gap-ms", type=float, default=1.0)
    p.add_argument("--baseline", help="profile JSON from 'ionleak profile'")
    p.add_argument("--addressing-mhz", help="comma-separated aliased addressing frequencies per ion")
    p.add_argument("--rabi-khz", type=float, default=12.5, help="Rabi frequency Omega/2pi for angle estimates")
    p.add_argument("--pad-us", type=float, default=10.0)
    p.add_argument("--min-cells", type=int, default=1)
    p.add_argument("--grid-csv", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dealias", help="candidate true frequencies of an aliased tone")
    p.add_argument("freq_mhz", type=float)
    p.add_argument("--fs-mhz", type=float, default=122.88)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--band", type=float, nargs=2, metavar=("LOW_MHZ", "HIGH_MHZ"))
    p.set_defaults(func=cmd_dealias)

    p = sub.add_parser("stream", help="serve a trace file over TCP")
    p.add_argument("trace")
    p.add_argument("--port", type=int, default=5025)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--realtime", action="store_true")
    p.add_argument("--sessions", type=int, default=1, help="clients to serve, 0 = forever")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("capture", help="record a served stream to a trace file")
    p.add_argument("host")
    p.add_argument("port", type=int)
    p.add_argument("out")
    p.add_argument("--duration", type=float, help="seconds of signal to keep")
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_capture)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NetworkError, ConnectionError, TimeoutError) as exc:
        print(f"ionleak: network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (DataError, ValueError, OSError, KeyError) as exc:
        print(f"ionleak: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
