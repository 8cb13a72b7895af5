import math

import pytest
from hypothesis import given, strategies as st

from romstep.config import (CaseConfig, ConfigError, case_defaults, load_config, parse_config,
                            serialize_config)

finite = st.floats(1e-3, 1e4, allow_nan=False, allow_infinity=False)


@st.composite
def configs(draw):
    case = draw(st.sampled_from(["shear_layer", "actuator", "custom"]))
    modes = draw(st.lists(st.integers(1, 300), min_size=1, max_size=5, unique=True))
    return CaseConfig(
        case=case, nx=draw(st.integers(2, 400)), ny=draw(st.integers(2, 400)),
        domain=[draw(finite) for _ in range(4)], Re=draw(finite), T=draw(finite),
        stages=draw(st.integers(1, 4)), safety=draw(st.floats(0.01, 1.0)),
        tol=draw(st.floats(1e-12, 1e-2)), fom_dt_max=draw(st.one_of(finite, st.just(math.inf))),
        stride=draw(st.integers(1, 10)), modes=modes, M_bc=draw(st.integers(0, 4)),
        rom_dt_max=draw(finite), dt_constant=draw(finite),
        eig_modes=draw(st.sampled_from([0] + modes)),
        alphas=draw(st.lists(st.floats(-1, 2), min_size=1, max_size=5)),
        alpha_meshes=draw(st.lists(st.integers(2, 50), min_size=1, max_size=4)),
        alpha_Re=draw(finite), run_fom=draw(st.booleans()), run_pod=draw(st.booleans()),
        run_rom=draw(st.booleans()), compare=draw(st.booleans()),
        output=draw(st.from_regex(r"[A-Za-z0-9_/.\-]{1,20}", fullmatch=True)))


@given(configs())
def test_round_trip(cfg):
    text = serialize_config(cfg)
    back = parse_config(text)
    assert back == cfg
    assert serialize_config(back) == text


def test_defaults_are_the_shear_layer():
    cfg = parse_config("")
    assert (cfg.case, cfg.nx, cfg.ny, cfg.Re, cfg.T) == ("shear_layer", 100, 100, 1000.0, 20.0)
    assert cfg.modes == [16, 32, 64, 128, 200]
    assert cfg.eig_M == 200


def test_actuator_defaults():
    cfg = parse_config("case = actuator\n")
    assert (cfg.nx, cfg.ny, cfg.Re, cfg.M_bc) == (200, 80, 100.0, 2)
    assert cfg.T == pytest.approx(8 * math.pi)
    assert cfg.dt_constant == pytest.approx(4 * math.pi / 200)
    assert case_defaults("shear_layer") == {}


def test_file_overrides_case_defaults():
    cfg = parse_config("case = actuator\ngrid.nx = 40  # coarse\nrom.modes = 4, 8\n")
    assert cfg.nx == 40 and cfg.ny == 80 and cfg.modes == [4, 8]


@pytest.mark.parametrize("text, line", [
    ("case = shear_layer\nnonsense\n", 2),
    ("\n\ngrid.nx = ten\n", 3),
    ("# header\nfoo.bar = 1\n", 2),
    ("stage.fom = maybe\n", 1),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError, match=f"line {line}:"):
        parse_config(text)


@pytest.mark.parametrize("text", [
    "case = cylinder\n",
    "time.safety = 1.5\n",
    "time.stages = 5\n",
    "rom.modes = 0\n",
    "flow.Re = -1\n",
    "grid.domain = 0,1,0\n",
    "eig.modes = 7\n",
    "rom.M_bc = -1\n",
])
def test_invalid_values(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.cfg")
