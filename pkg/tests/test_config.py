import pytest
from hypothesis import given, settings, strategies as st

from rubblepile.config import (ConfigError, SimConfig, build_arg_parser,
                               config_hash, parse_config, serialize,
                               parse_config_file, with_overrides)

TABLE_FLAGS = [
    "spawnposx", "spawnposy", "spawnposz",
    "spawnboundx", "spawnboundy", "spawnboundz",
    "numlayers", "numobjs",
    "setlightrot", "lighttype", "lightintensity",
    "lightrotx", "lightroty", "lightrotz",
    "lightposx", "lightposy", "lightposz",
    "fogdensity", "fogintensity",
    "headlamp_on", "headlamp_intensity",
    "position_distribution",
]


def test_defaults_parse():
    cfg = parse_config([])
    assert cfg == SimConfig()


def test_paper_scale_flags():
    cfg = parse_config(["--numlayers", "15", "--numobjs", "250"])
    assert cfg.numlayers * cfg.numobjs == 3750


def test_numlayers_zero_rejected():
    with pytest.raises(ConfigError, match="numlayers"):
        parse_config(["--numlayers", "0"])


def test_negative_fog_rejected():
    with pytest.raises(ConfigError, match="fogdensity"):
        parse_config(["--fogdensity", "-1"])


def test_help_contains_every_flag():
    help_text = build_arg_parser().format_help()
    for flag in TABLE_FLAGS:
        assert "--%s" % flag in help_text, flag


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit):
        parse_config(["--notaflag", "1"])


def test_file_overridden_by_flags(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("numlayers = 5\nfogdensity = 0.2\n")
    cfg = parse_config(["--config", str(p), "--numlayers", "7"])
    assert cfg.numlayers == 7
    assert cfg.fogdensity == 0.2


def test_malformed_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("numlayers 5 oops\n")
    with pytest.raises(ConfigError):
        parse_config(["--config", str(p)])


cfg_strategy = st.builds(
    SimConfig,
    seed=st.integers(0, 2 ** 64 - 1),
    spawnboundx=st.floats(0.5, 50, allow_nan=False),
    numlayers=st.integers(1, 30),
    numobjs=st.integers(1, 500),
    lighttype=st.sampled_from(["spot", "directional", "point"]),
    lightintensity=st.floats(0, 100, allow_nan=False),
    fogdensity=st.floats(0, 10, allow_nan=False),
    setlightrot=st.booleans(),
    headlamp_on=st.booleans(),
    position_distribution=st.sampled_from(["uniform", "gaussian"]),
)


@settings(max_examples=100, deadline=None)
@given(cfg_strategy)
def test_serialize_parse_roundtrip(cfg):
    text = serialize(cfg)
    values = parse_config_file(text)
    assert SimConfig(**values) == cfg
    assert config_hash(SimConfig(**values)) == config_hash(cfg)


def test_hash_field_sensitivity():
    c = SimConfig()
    assert config_hash(c) != config_hash(with_overrides(c, seed=c.seed + 1))


def test_hash_collision_smoke():
    digests = {config_hash(SimConfig(seed=s, numobjs=1 + s % 7))
               for s in range(100)}
    assert len(digests) == 100
