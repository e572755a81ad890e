import json

import pytest

from transonic.config import defaults, list_presets, load_config, parse_config, preset_text
from transonic.errors import ConfigError


def test_empty_text_gives_defaults():
    assert parse_config("", env={}).as_dict() == defaults().as_dict()
    c = defaults()
    assert (c.gamma, c.U10, c.n_r, c.mode) == (1.4, -0.2, 257, "background")


def test_out_of_range_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config("[run]\nmode = verify\n\n[gas]\ngamma = 3.5\n", env={})
    assert info.value.line == 5
    assert "line 5" in str(info.value)


@pytest.mark.parametrize("text, line", [
    ("[gas]\nbogus = 1\n", 2),
    ("[nope]\nx = 1\n", 1),
    ("[domain]\nn_r = many\n", 2),
    ("[data]\ng0 = wobble:3\n", 2),
    ("[data]\ng0 = cos:1.5\n", 2),
    ("[run]\nmode = flying\n", 2),
    ("gamma = 1.4\n", 1),
])
def test_invalid_entries(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text, env={})
    assert info.value.line == line


def test_sweep_list_and_profiles():
    c = parse_config("[data]\nepsilons = 1e-3, 2e-3, 4e-3\nB1 = 0.5*cos:2 + const:1\n", env={})
    assert c.epsilons == [1e-3, 2e-3, 4e-3]
    assert c.B1 == "0.5*cos:2 + const:1"
    with pytest.raises(ConfigError):
        parse_config("[data]\nepsilons = 1e-3\n", env={})


def test_json_equivalent_to_ini():
    ini = parse_config("[domain]\nn_r = 65\n[data]\nepsilon = 2e-3\n", env={})
    js = parse_config(json.dumps({"domain": {"n_r": 65}, "data": {"epsilon": 2e-3}}), env={})
    assert ini.as_dict() == js.as_dict()


def test_json_error_line():
    text = '{\n  "gas": {\n    "gamma": 0.5\n  }\n}\n'
    with pytest.raises(ConfigError) as info:
        parse_config(text, env={})
    assert info.value.line == 3


def test_environment_override():
    c = parse_config("[data]\nepsilon = 1e-3\n", env={"TA_DATA_EPSILON": "2e-3", "HOME": "/x"})
    assert c.epsilon == 2e-3
    c = parse_config("", env={"ta_domain_n_r": "65"})
    assert c.n_r == 65
    with pytest.raises(ConfigError):
        parse_config("", env={"TA_DATA_NOPE": "1"})


def test_radii_order():
    with pytest.raises(ConfigError):
        parse_config("[domain]\nr0 = 2\nr1 = 1\n", env={})


def test_replace():
    c = defaults().replace(epsilon=5e-3, mode="axisym")
    assert c.epsilon == 5e-3 and c.mode == "axisym"
    assert defaults().epsilon == 1e-3
    with pytest.raises(ConfigError):
        defaults().replace(nonsense=1)


def test_presets_parse():
    names = list_presets()
    assert {"background", "irrotational", "rotational", "axisym"} <= set(names)
    for name in names:
        parse_config(preset_text(name), env={})
    with pytest.raises(ConfigError):
        preset_text("missing")


def test_file_overlays_preset(tmp_path):
    p = tmp_path / "user.ini"
    p.write_text("[domain]\nn_r = 65\n")
    c = load_config(str(p), "irrotational", env={})
    assert c.n_r == 65 and c.mode == "irrotational" and c.N == 16
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.ini"), env={})
