"""Simulation parameter set: parsing, validation, serialization, hashing."""

from __future__ import annotations

import argparse
import hashlib
from dataclasses import dataclass, field, fields, replace

LIGHT_TYPES = ("spot", "directional", "point")
POSITION_DISTRIBUTIONS = ("uniform", "gaussian")

DEFAULT_ASSET_WEIGHTS = {
    "concrete_slab": 4.0,
    "cinder_block": 3.0,
    "brick": 2.0,
    "culvert": 1.0,
    "rebar_cluster": 1.0,
}


class ConfigError(ValueError):
    """Raised for unknown keys, malformed values, or out-of-range fields."""


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    # pile spawn arguments
    spawnposx: float = 0.0
    spawnposy: float = 0.0
    spawnposz: float = 0.0
    spawnboundx: float = 5.0  # half-extents: 10 m x 10 m footprint
    spawnboundy: float = 5.0
    spawnboundz: float = 1.0
    numlayers: int = 3
    numobjs: int = 40
    # environmental lighting
    setlightrot: bool = True
    lighttype: str = "directional"
    lightintensity: float = 1.0
    lightrotx: float = 0.0
    lightroty: float = 0.0
    lightrotz: float = 0.0
    lightposx: float = 0.0
    lightposy: float = 0.0
    lightposz: float = 10.0
    # environmental effects
    fogdensity: float = 0.0
    fogintensity: float = 0.0
    headlamp_on: bool = False
    headlamp_intensity: float = 1.0
    # spawn position distribution
    position_distribution: str = "uniform"
    position_sigma: float = 0.0  # gaussian sigma in meters; 0 = half-extent / 2
    # analysis
    voxel_resolution: float = 0.10
    # asset class id -> selection weight
    asset_weights: dict = field(default_factory=lambda: dict(DEFAULT_ASSET_WEIGHTS))

    def validate(self):
        def require(cond, name, bound):
            if not cond:
                raise ConfigError("%s out of range: must be %s" % (name, bound))

        require(self.seed >= 0, "seed", ">= 0")
        for name in ("spawnboundx", "spawnboundy", "spawnboundz"):
            require(getattr(self, name) > 0, name, "> 0")
        require(self.numlayers >= 1, "numlayers", ">= 1")
        require(self.numobjs >= 1, "numobjs", ">= 1")
        require(self.lighttype in LIGHT_TYPES, "lighttype",
                "one of %s" % (LIGHT_TYPES,))
        for name in ("lightintensity", "fogdensity", "fogintensity",
                     "headlamp_intensity"):
            require(getattr(self, name) >= 0, name, ">= 0")
        require(self.position_distribution in POSITION_DISTRIBUTIONS,
                "position_distribution", "one of %s" % (POSITION_DISTRIBUTIONS,))
        require(self.position_sigma >= 0, "position_sigma", ">= 0")
        require(self.voxel_resolution > 0, "voxel_resolution", "> 0")
        if not self.asset_weights:
            raise ConfigError("asset_weights out of range: must be nonempty")
        for k, w in self.asset_weights.items():
            require(w >= 0, "asset_weights[%s]" % k, ">= 0")
        require(any(w > 0 for w in self.asset_weights.values()),
                "asset_weights", "at least one weight > 0")
        return self


_BOOL_FIELDS = {"setlightrot", "headlamp_on"}
_INT_FIELDS = {"seed", "numlayers", "numobjs"}
_STR_FIELDS = {"lighttype", "position_distribution"}


def _parse_bool(s):
    s = str(s).strip().lower()
    if s in ("true", "1", "yes", "on"):
        return True
    if s in ("false", "0", "no", "off"):
        return False
    raise ConfigError("malformed boolean: %r" % s)


def _parse_weights(s):
    if isinstance(s, dict):
        return dict(s)
    out = {}
    for item in str(s).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError("malformed asset weight entry: %r" % item)
        key, _, val = item.partition(":")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError("malformed asset weight value: %r" % item) from None
    if not out:
        raise ConfigError("malformed asset_weights: %r" % s)
    return out


def _format_weights(weights):
    return ",".join("%s:%s" % (k, repr(float(w))) for k, w in sorted(weights.items()))


def _coerce(name, raw):
    try:
        if name in _BOOL_FIELDS:
            return _parse_bool(raw)
        if name in _INT_FIELDS:
            return int(raw)
        if name in _STR_FIELDS:
            return str(raw)
        if name == "asset_weights":
            return _parse_weights(raw)
        return float(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError("malformed value for %s: %r" % (name, raw)) from None


def serialize(cfg: SimConfig) -> str:
    """Flat key=value text; parse(serialize(c)) == c bit-exactly (repr floats)."""
    lines = []
    for f in fields(SimConfig):
        v = getattr(cfg, f.name)
        if f.name in _BOOL_FIELDS:
            s = "true" if v else "false"
        elif f.name == "asset_weights":
            s = _format_weights(v)
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        lines.append("%s=%s" % (f.name, s))
    return "\n".join(lines) + "\n"


_FIELD_NAMES = {f.name for f in fields(SimConfig)}


def parse_config_file(text: str) -> dict:
    """Parse key=value lines ('#' comments) into a field dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("malformed config line %d: %r" % (lineno, line))
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELD_NAMES:
            raise ConfigError("unknown config key on line %d: %r" % (lineno, key))
        out[key] = _coerce(key, val.strip())
    return out


def build_arg_parser(parser=None) -> argparse.ArgumentParser:
    """Argument parser exposing every configuration parameter as a flag."""
    p = parser or argparse.ArgumentParser(prog="rubblepile")
    p.add_argument("--config", metavar="PATH",
                   help="key=value config file; flags override file values")
    g = p.add_argument_group("pile spawn arguments")
    g.add_argument("--seed", type=int, metavar="U64", help="determinism root")
    for ax in "xyz":
        g.add_argument("--spawnpos%s" % ax, type=float, metavar="M",
                       help="center position of spawn volume (%s)" % ax)
        g.add_argument("--spawnbound%s" % ax, type=float, metavar="M",
                       help="spawn volume half-extent along %s" % ax)
    g.add_argument("--numlayers", type=int, help="number of layers in pile")
    g.add_argument("--numobjs", type=int, help="objects per layer")
    g.add_argument("--position_distribution", choices=POSITION_DISTRIBUTIONS,
                   help="x/y spawn position distribution")
    g.add_argument("--position_sigma", type=float, metavar="M",
                   help="gaussian sigma; 0 selects half-extent/2")
    g.add_argument("--asset_weights", metavar="ID:W,...",
                   help="asset class selection weights")
    g = p.add_argument_group("environmental lighting")
    g.add_argument("--setlightrot", type=_parse_bool, metavar="BOOL",
                   help="fixed light rotation (else randomized)")
    g.add_argument("--lighttype", choices=LIGHT_TYPES, help="global light type")
    g.add_argument("--lightintensity", type=float, help="global light intensity")
    for ax in "xyz":
        g.add_argument("--lightrot%s" % ax, type=float, metavar="DEG",
                       help="light rotation about %s" % ax.upper())
        g.add_argument("--lightpos%s" % ax, type=float, metavar="M",
                       help="light position along %s" % ax.upper())
    g = p.add_argument_group("environmental effects")
    g.add_argument("--fogdensity", type=float, metavar="1/M",
                   help="baseline density for fog/smoke effect")
    g.add_argument("--fogintensity", type=float,
                   help="fog/smoke noise variation amplitude")
    g.add_argument("--headlamp_on", type=_parse_bool, metavar="BOOL",
                   help="camera-co-located headlamp")
    g.add_argument("--headlamp_intensity", type=float, help="headlamp intensity")
    g = p.add_argument_group("analysis")
    g.add_argument("--voxel_resolution", type=float, metavar="M",
                   help="voxel size for void analysis")
    return p


def config_from_namespace(ns) -> SimConfig:
    """Merge a parsed argparse namespace (and optional --config file) into a
    validated SimConfig. Flags override file values."""
    values = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError("cannot read config file: %s" % e) from None
        values.update(parse_config_file(text))
    for name in _FIELD_NAMES:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = _coerce(name, v) if name == "asset_weights" else v
    return SimConfig(**values).validate()


def parse_config(argv) -> SimConfig:
    """Parse command-line flags (Table-style names) into a validated SimConfig."""
    ns = build_arg_parser().parse_args(argv)
    return config_from_namespace(ns)


def config_hash(cfg: SimConfig) -> int:
    """Stable 64-bit digest of the full parameter set; printed as 16 hex chars."""
    digest = hashlib.sha256(serialize(cfg).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def with_overrides(cfg: SimConfig, **kw) -> SimConfig:
    return replace(cfg, **kw).validate()
