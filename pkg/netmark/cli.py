# -*- coding: utf-8 -*-
#
# Copyright © 2024 The netmark authors. All rights reserved.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""The netmark command line: simulate, analyze, envelope, aggregate and
validate.

Every command that writes files also writes a JSON run manifest next to its
first output, recording the command line, seed, parameters and the SHA-256
digests of its inputs and outputs. When NETMARK_DB_URI is set, the run is
also recorded in the run registry.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

from netmark import ConfigurationError, NetmarkError, __version__, \
    get_db_session, has_db_session
from netmark.config import read_config, resolve_threads
from netmark.dataio import MOBI_COLUMNS, TRIP_COLUMNS, aggregate_months, \
    export_curve, export_envelope, export_pattern, export_profiles, \
    export_summary, export_surface, load_marked_pattern, load_network, \
    load_station_coords, profiles_from_aggregate, read_trips, trip_months
from netmark.enums import ExportFormat, TestFunctionId
from netmark.envel import EnvelopeConfig, global_envelope
from netmark.estim import default_rgrid, estimate_summary
from netmark.netgeom import distance_matrix, summarize
from netmark.schema import Run, RunFile
from netmark.sim import SimConfig, simulate_pattern
from netmark.utilities import file_digest, format_float, non_negative_float, \
    positive_float, positive_int, valid_alpha, valid_month, valid_scenario, \
    valid_seed, valid_stat

log = logging.getLogger(__package__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s - %(message)s"


class UsageError(NetmarkError):
    """Exception raised for invalid combinations of command line options."""
    exit_code = 2


@dataclass
class RunManifest(object):
    command: str
    argv: List[str]
    version: str
    seed: Optional[int] = None
    parameters: Dict[str, object] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    started: str = ""
    wall_clock: float = 0.0

    def add_inputs(self, *paths):
        for p in paths:
            if p is not None:
                self.inputs[str(p)] = file_digest(p)

    def add_outputs(self, *paths):
        for p in paths:
            if p is not None:
                self.outputs[str(p)] = file_digest(p)

    def output_digest(self) -> str:
        """Returns a digest over all output digests, in path order."""
        return ":".join(self.outputs[k] for k in sorted(self.outputs))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _configure_logging(args):
    level = logging.WARNING
    if args.verbose:
        level = logging.INFO
    if args.debug:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def _load_pattern(args, conf):
    net = load_network(args.network,
                       snap_tol=conf.getfloat("network", "snap_tol"))
    return net, load_marked_pattern(net, args.pattern, args.marks)


def _rgrid(args, conf, p, dm):
    return default_rgrid(dm, p.network.total_length,
                         nr=args.nr or conf.getint("estimate", "nr"),
                         r_max=args.rmax, bandwidth=args.bandwidth,
                         rmax_fraction=conf.getfloat("estimate",
                                                     "rmax_fraction"),
                         bandwidth_factor=conf.getfloat("estimate",
                                                        "bandwidth_factor"))


def _grid_parameters(rgrid) -> dict:
    return {"nr": len(rgrid),
            "rmax": format_float(rgrid.r_max),
            "bandwidth": format_float(rgrid.bandwidth)}


def cmd_simulate(args, conf, threads: int, manifest: RunManifest):
    net = load_network(args.network,
                       snap_tol=conf.getfloat("network", "snap_tol"))
    cfg = SimConfig(intensity=args.intensity,
                    n_timestamps=args.timestamps,
                    scenario=args.scenario,
                    neighbor_radius=args.radius,
                    seed=args.seed)
    p = simulate_pattern(net, cfg)
    export_pattern(p, args.out_points, args.out_marks)

    manifest.seed = args.seed
    manifest.parameters.update({"lambda": format_float(args.intensity),
                                "scenario": args.scenario.value,
                                "timestamps": args.timestamps,
                                "radius": format_float(args.radius),
                                "points": p.n})
    manifest.add_inputs(args.network)
    manifest.add_outputs(args.out_points, args.out_marks)


def cmd_analyze(args, conf, threads: int, manifest: RunManifest):
    net, p = _load_pattern(args, conf)
    dm = distance_matrix(net, p.points, threads=threads)
    rgrid = _rgrid(args, conf, p, dm)

    surface, curve = estimate_summary(p, args.stat, rgrid, dm=dm,
                                      threads=threads, raw=args.raw,
                                      strict=False)
    export_curve(curve, args.out, args.format)
    if args.out_surface:
        export_surface(surface, args.out_surface, args.format)

    manifest.parameters.update({"stat": args.stat.value, "raw": args.raw,
                                "format": args.format.value})
    manifest.parameters.update(_grid_parameters(rgrid))
    manifest.add_inputs(args.network, args.pattern, args.marks)
    manifest.add_outputs(args.out, args.out_surface)


def cmd_envelope(args, conf, threads: int, manifest: RunManifest):
    net, p = _load_pattern(args, conf)
    dm = distance_matrix(net, p.points, threads=threads)
    rgrid = _rgrid(args, conf, p, dm)

    cfg = EnvelopeConfig(
        n_perm=args.nperm or conf.getint("envelope", "nperm"),
        alpha=args.alpha or conf.getfloat("envelope", "alpha"),
        seed=args.seed)
    result = global_envelope(p, args.stat, rgrid, cfg, dm=dm,
                             threads=threads, surface=args.surface)
    export_envelope(result, args.out, args.format)
    print("p_value={}".format(format_float(result.p_value)))

    manifest.seed = args.seed
    manifest.parameters.update({"stat": args.stat.value,
                                "nperm": cfg.n_perm,
                                "alpha": format_float(cfg.alpha),
                                "surface": args.surface,
                                "format": args.format.value,
                                "p_value": format_float(result.p_value)})
    manifest.parameters.update(_grid_parameters(rgrid))
    manifest.add_inputs(args.network, args.pattern, args.marks)
    manifest.add_outputs(args.out)


def cmd_aggregate(args, conf, threads: int, manifest: RunManifest):
    profile_outputs = args.out_points or args.out_marks
    if profile_outputs:
        if not (args.out_points and args.out_marks):
            raise UsageError("--out-points and --out-marks must be given "
                             "together")
        if not (args.network and args.stations):
            raise UsageError("Station profiles require --network and "
                             "--stations")
        if not args.month or len(args.month) != 1:
            raise UsageError("Station profiles require exactly one "
                             "--month")
    elif not args.summary:
        raise UsageError("Nothing to do: give --summary and/or "
                         "--out-points with --out-marks")

    columns = MOBI_COLUMNS if args.mobi else TRIP_COLUMNS
    trips = read_trips(args.trips, columns, skip_invalid=args.skip_invalid)
    months = args.month or trip_months(trips)
    aggregates = aggregate_months(trips, months)

    manifest.parameters["months"] = months
    manifest.add_inputs(args.trips)

    if args.summary:
        export_summary([a.summary for a in aggregates], args.summary)
        manifest.add_outputs(args.summary)

    if profile_outputs:
        threshold = args.snap_threshold
        if threshold is None:
            threshold = conf.getfloat("profiles", "snap_threshold")
        net = load_network(args.network,
                           snap_tol=conf.getfloat("network", "snap_tol"))
        profiles = profiles_from_aggregate(aggregates[0], net,
                                           load_station_coords(args.stations),
                                           snap_threshold=threshold)
        export_profiles(profiles, args.out_points, args.out_marks,
                        args.out_stations)

        manifest.parameters["snap_threshold"] = format_float(threshold)
        manifest.add_inputs(args.network, args.stations)
        manifest.add_outputs(args.out_points, args.out_marks,
                             args.out_stations)


def cmd_validate(args, conf, threads: int, manifest: RunManifest):
    net = load_network(args.network,
                       snap_tol=conf.getfloat("network", "snap_tol"))
    s = summarize(net)
    print("nodes={}".format(s.nodes))
    print("segments={}".format(s.segments))
    print("components={}".format(s.components))
    print("border_nodes={}".format(s.border_nodes))
    print("total_length={}".format(format_float(s.total_length)))


def _add_pattern_args(parser):
    parser.add_argument("--network", help="Network file (CSV or GeoJSON)",
                        type=Path, required=True)
    parser.add_argument("--pattern", help="Pattern CSV file",
                        type=Path, required=True)
    parser.add_argument("--marks", help="Marks CSV file",
                        type=Path, required=True)
    parser.add_argument("--stat", help="The statistic, one of: " +
                                       ", ".join(tf.value for tf in
                                                 TestFunctionId),
                        type=valid_stat, required=True)
    parser.add_argument("--nr", help="Number of r values",
                        type=positive_int)
    parser.add_argument("--rmax", help="Largest r in meters",
                        type=positive_float)
    parser.add_argument("--bandwidth", help="Kernel bandwidth in meters",
                        type=positive_float)
    parser.add_argument("--format", help="Output format",
                        type=ExportFormat, choices=list(ExportFormat),
                        default=ExportFormat.CSV)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmark",
        description="Mark summary characteristics and random labelling "
                    "tests for point patterns with function-valued marks "
                    "on linear networks.")
    parser.add_argument("-c", "--config", help="Configuration file",
                        type=str)
    parser.add_argument("-v", "--verbose", help="Log at info level",
                        action="store_true")
    parser.add_argument("--debug", help="Log at debug level",
                        action="store_true")
    parser.add_argument("--threads", help="Worker threads. Defaults to "
                                          "NETMARK_THREADS, then the "
                                          "configuration file",
                        type=positive_int)
    parser.add_argument("--manifest", help="Run manifest path. Defaults to "
                                           "<first output>.manifest.json",
                        type=Path)
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)

    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    sim = sub.add_parser("simulate", help="Simulate a marked Poisson "
                                          "pattern on a network")
    sim.add_argument("--network", type=Path, required=True,
                     help="Network file (CSV or GeoJSON)")
    sim.add_argument("--lambda", dest="intensity", type=positive_float,
                     required=True, help="Intensity in points per meter")
    sim.add_argument("--scenario", type=valid_scenario, default="1",
                     help="Mark scenario 1, 2 or 3")
    sim.add_argument("--timestamps", type=positive_int, default=30,
                     help="Timestamps per mark")
    sim.add_argument("--radius", type=non_negative_float, default=876.0,
                     help="Neighbourhood radius of scenario 3, in meters")
    sim.add_argument("--seed", type=valid_seed, required=True,
                     help="Unsigned 64-bit seed")
    sim.add_argument("--out-points", type=Path, required=True)
    sim.add_argument("--out-marks", type=Path, required=True)
    sim.set_defaults(func=cmd_simulate, first_output="out_points")

    ana = sub.add_parser("analyze", help="Estimate a mark summary "
                                         "characteristic")
    _add_pattern_args(ana)
    ana.add_argument("--raw", action="store_true",
                     help="Write the unnormalised time integral")
    ana.add_argument("--out", type=Path, required=True,
                     help="Global curve output file")
    ana.add_argument("--out-surface", type=Path,
                     help="Pointwise surface output file")
    ana.set_defaults(func=cmd_analyze, first_output="out")

    env = sub.add_parser("envelope", help="Random labelling test with a "
                                          "global envelope")
    _add_pattern_args(env)
    env.add_argument("--nperm", type=positive_int,
                     help="Number of permutations")
    env.add_argument("--alpha", type=valid_alpha,
                     help="Significance level")
    env.add_argument("--seed", type=valid_seed, required=True,
                     help="Unsigned 64-bit seed")
    env.add_argument("--surface", action="store_true",
                     help="Envelope the pointwise (r, t) surface")
    env.add_argument("--out", type=Path, required=True,
                     help="Envelope output file")
    env.set_defaults(func=cmd_envelope, first_output="out")

    agg = sub.add_parser("aggregate", help="Aggregate trips into monthly "
                                           "station profiles")
    agg.add_argument("--trips", type=Path, required=True,
                     help="Trips CSV file")
    agg.add_argument("--mobi", action="store_true",
                     help="The trips file uses Mobi system data columns")
    agg.add_argument("--skip-invalid", action="store_true",
                     help="Skip trip rows that do not parse")
    agg.add_argument("--month", type=valid_month, action="append",
                     help="Month YYYY-MM. May be repeated. Defaults to "
                          "every month in the trips file")
    agg.add_argument("--summary", type=Path,
                     help="Monthly summary output file")
    agg.add_argument("--network", type=Path,
                     help="Network file (CSV or GeoJSON)")
    agg.add_argument("--stations", type=Path,
                     help="Station coordinates CSV file")
    agg.add_argument("--snap-threshold", type=non_negative_float,
                     help="Largest station snap distance in meters")
    agg.add_argument("--out-points", type=Path)
    agg.add_argument("--out-marks", type=Path)
    agg.add_argument("--out-stations", type=Path)
    agg.set_defaults(func=cmd_aggregate, first_output=None)

    val = sub.add_parser("validate", help="Check and summarise a network")
    val.add_argument("--network", type=Path, required=True,
                     help="Network file (CSV or GeoJSON)")
    val.set_defaults(func=cmd_validate, first_output=None)

    return parser


def _manifest_path(args, manifest: RunManifest) -> Optional[Path]:
    if args.manifest:
        return args.manifest
    if not manifest.outputs:
        return None
    first = getattr(args, args.first_output) if args.first_output \
        else Path(sorted(manifest.outputs)[0])
    return Path(str(first) + ".manifest.json")


def _record_run(manifest: RunManifest, succeeded: bool):
    session = get_db_session()
    try:
        run = Run(manifest.command, manifest.version, manifest.seed)
        session.add(run)
        session.flush()
        if succeeded:
            for path, digest in manifest.inputs.items():
                session.add(RunFile(run, "input", path, digest))
            for path, digest in manifest.outputs.items():
                session.add(RunFile(run, "output", path, digest))
            run.succeeded(session, manifest.to_json(),
                          manifest.output_digest())
        else:
            run.failed(session)
        session.commit()
    except Exception as e:
        session.rollback()
        log.error("Failed to record the run: {}".format(e))
        raise
    finally:
        session.close()


def main(argv: Optional[List[str]] = None) -> int:
    """Runs the command line, returning the exit code: 0 on success, 1 for
    data or validation errors and 2 for usage errors."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)

    argv = list(sys.argv[1:] if argv is None else argv)
    manifest = RunManifest(args.command, argv, __version__)
    manifest.started = datetime.now(timezone.utc).isoformat()
    start = time.monotonic()

    try:
        conf = read_config(args.config)
        threads = resolve_threads(conf, args.threads)
        manifest.parameters["threads"] = threads

        args.func(args, conf, threads, manifest)

        manifest.wall_clock = time.monotonic() - start
        path = _manifest_path(args, manifest)
        if path is not None:
            path.write_text(manifest.to_json(), encoding="utf-8")
            log.info("Wrote run manifest {}".format(path))
        if has_db_session():
            _record_run(manifest, True)
    except NetmarkError as e:
        log.error(e.message)
        if has_db_session():
            _record_run(manifest, False)
        return e.exit_code
    except (ConfigurationError, FileNotFoundError, ValueError) as e:
        log.error(str(e))
        return 1

    return 0
