"""Procedural rubble-pile simulator: deterministic rigid-body deposition,
ray-cast RGB-D rendering with darkness/fog/dust, void-space analysis,
ground-truth dataset export, trajectory benchmarking, and a websocket
teleoperation server."""

from .assets import AssetClass, AssetError, Catalog, default_catalog
from .bench import (AlignmentError, BenchError, BenchReport,
                    EstimatedTrajectory, align_model, compute_report,
                    count_segments, load_estimate)
from .camera import CameraState, Trajectory, apply_command, look_at_quaternion, run_script
from .config import SimConfig, build_arg_parser, config_hash, parse_config_file, serialize
from .deposition import DepositionError, Pile, build_pile, contact_report
from .export import (DatasetManifest, ExportError, export_stl, read_depth_png,
                     read_groundtruth, read_stl, write_dataset)
from .render import (DustPlume, FogField, Frame, GlobalLight, LightingRig,
                     Scene, ray_cast, render_frame, rig_from_config)
from .server import ProtocolError, Session, create_app, serve
from .voids import VoidRegion, VoidsError, VoxelGrid, find_voids, void_report, voxelize

__version__ = "0.1.0"

__all__ = [
    "AssetClass", "AssetError", "Catalog", "default_catalog",
    "AlignmentError", "BenchError", "BenchReport", "EstimatedTrajectory",
    "align_model", "compute_report", "count_segments", "load_estimate",
    "CameraState", "Trajectory", "apply_command", "look_at_quaternion",
    "run_script",
    "SimConfig", "build_arg_parser", "config_hash", "parse_config_file",
    "serialize",
    "DepositionError", "Pile", "build_pile", "contact_report",
    "DatasetManifest", "ExportError", "export_stl", "read_depth_png",
    "read_groundtruth", "read_stl", "write_dataset",
    "DustPlume", "FogField", "Frame", "GlobalLight", "LightingRig", "Scene",
    "ray_cast", "render_frame", "rig_from_config",
    "ProtocolError", "Session", "create_app", "serve",
    "VoidRegion", "VoidsError", "VoxelGrid", "find_voids", "void_report",
    "voxelize",
]
