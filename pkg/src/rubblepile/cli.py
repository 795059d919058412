"""Command-line entry points: build piles, analyze voids, export datasets,
score SfM estimates, and host live stream sessions."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import DEFAULT_ONTRACK_THRESHOLD, compute_report, load_estimate
from .camera import parse_waypoints, run_script
from .config import build_arg_parser, config_from_namespace, config_hash, serialize
from .deposition import build_pile
from .export import DatasetManifest, export_stl, write_dataset
from .render import Scene, fog_from_config, render_frame, rig_from_config
from .server import DEFAULT_RATE, serve
from .voids import find_voids, void_report, voxelize


def _add_config_args(sub):
    build_arg_parser(sub)
    return sub


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rubblepile",
        description="procedural rubble piles: build, render, export, score")
    subs = parser.add_subparsers(dest="command", required=True)

    p_build = _add_config_args(subs.add_parser(
        "build", help="generate and settle a pile"))
    p_build.add_argument("--stl", metavar="PATH",
                         help="write the settled pile as binary STL")

    p_voids = _add_config_args(subs.add_parser(
        "voids", help="build a pile and report its void regions"))
    p_voids.add_argument("--aperture-threshold", type=float, default=0.30,
                         metavar="M", help="max opening size still counted "
                         "as sealed (default 0.30 m)")

    p_ds = _add_config_args(subs.add_parser(
        "dataset", help="render a scripted trajectory to a dataset dir"))
    p_ds.add_argument("--script", required=True, metavar="PATH",
                      help="waypoint file: `px py pz lx ly lz` per line")
    p_ds.add_argument("--out", required=True, metavar="DIR")
    p_ds.add_argument("--rate", type=float, default=30.0, metavar="HZ")
    p_ds.add_argument("--speed", type=float, default=1.0, metavar="M/S")

    p_bench = subs.add_parser(
        "bench", help="score an SfM estimate against dataset ground truth")
    p_bench.add_argument("--dataset", required=True, metavar="DIR")
    p_bench.add_argument("--estimate", required=True, metavar="PATH")
    p_bench.add_argument("--ontrack-threshold", type=float,
                         default=DEFAULT_ONTRACK_THRESHOLD, metavar="M")

    p_serve = _add_config_args(subs.add_parser(
        "serve", help="host a live teleoperation websocket session"))
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--rate", type=float, default=DEFAULT_RATE,
                         metavar="HZ")

    ns = parser.parse_args(argv)

    if ns.command == "build":
        cfg = config_from_namespace(ns)
        pile = build_pile(cfg)
        print("seed %d hash %016x instances %d steps %d"
              % (cfg.seed, config_hash(cfg), len(pile.instances),
                 pile.settle_steps))
        if ns.stl:
            export_stl(pile, ns.stl)
            print("stl %s" % ns.stl)
        return 0

    if ns.command == "voids":
        cfg = config_from_namespace(ns)
        pile = build_pile(cfg)
        grid = voxelize(pile, cfg.voxel_resolution)
        regions = find_voids(grid, ns.aperture_threshold)
        print(void_report(regions))
        return 0

    if ns.command == "dataset":
        cfg = config_from_namespace(ns)
        pile = build_pile(cfg)
        scene = Scene(pile)
        rig = rig_from_config(cfg)
        fog = fog_from_config(cfg)
        with open(ns.script) as fh:
            waypoints = parse_waypoints(fh.read())
        traj = run_script(pile, waypoints, rate=ns.rate, speed=ns.speed)

        def frames():
            for i, (t, state) in enumerate(traj):
                yield render_frame(scene, state, rig, fog, t, frame_index=i)

        man = DatasetManifest(root=ns.out, config_text=serialize(cfg),
                              config_hash="%016x" % config_hash(cfg),
                              seed=cfg.seed, frame_count=len(traj),
                              rate=ns.rate)
        write_dataset(frames(), man, pile=pile)
        print("dataset %s frames %d" % (ns.out, len(traj)))
        return 0

    if ns.command == "bench":
        import os
        est = load_estimate(ns.estimate)
        gt = os.path.join(ns.dataset, "groundtruth.txt")
        report = compute_report(est, gt, delta=ns.ontrack_threshold)
        print(report.row())
        print(report.keyvalues())
        return 0

    if ns.command == "serve":
        cfg = config_from_namespace(ns)
        serve(cfg, port=ns.port, rate=ns.rate, host=ns.host)
        return 0

    parser.error("unknown command")


if __name__ == "__main__":
    sys.exit(main())
