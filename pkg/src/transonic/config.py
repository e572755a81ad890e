"""Run configuration: INI-like or JSON text, validated with line numbers.

Layout (every key optional)::

    [run]      mode, base_mode, l0_list, decay_check, n_streamlines
    [gas]      gamma, A0, rho0, U10, U20
    [domain]   r0, r1, n_r, N, n_theta, L, hx
    [solver]   l0, sigma1, tol, max_iter, inner_tol, outer_tol
    [data]     epsilon, epsilons, g0, g1, B1, A1, q1, q2, q3

Environment variables ``TA_<SECTION>_<KEY>`` (case-insensitive) override
file values, e.g. ``TA_DATA_EPSILON=2e-3``.
"""
from __future__ import annotations

import configparser
import json
import os
import re
from dataclasses import dataclass, field

from .errors import ConfigError
from .profiles import parse_profile

MODES = ("background", "irrotational", "rotational", "axisym", "sweep", "verify")


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    t = str(text).strip().strip("[]")
    return [float(v) for v in re.split(r"[,\s]+", t) if v]


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


def _opt_int(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return int(text)


def _profile(text):
    return parse_profile(text).spec


# key -> (type converter, default, range check or None, help)
SCHEMA = {
    "run": {
        "mode": (str, "background", lambda v: v in MODES, "one of " + "|".join(MODES)),
        "base_mode": (str, "irrotational", lambda v: v in ("irrotational", "rotational", "axisym"),
                      "solver used by sweep runs"),
        "l0_list": (_floats, [0.5, 1.0, -3.0], None, "l0 values checked by verify"),
        "decay_check": (_bool, False, None, "axisym: rerun at 2L and compare tails"),
        "n_streamlines": (int, 20, lambda v: v > 0, "rotational: streamlines sampled"),
    },
    "gas": {
        "gamma": (float, 1.4, lambda v: 1.0 < v < 3.0, "adiabatic exponent in (1, 3)"),
        "A0": (float, 1.0 / 1.4, lambda v: v > 0, "entropy constant"),
        "rho0": (float, 1.0, lambda v: v > 0, "density at r1"),
        "U10": (float, -0.2, lambda v: v <= 0, "radial velocity at r1 (<= 0)"),
        "U20": (float, 0.6, lambda v: v != 0, "angular velocity at r1 (nonzero)"),
    },
    "domain": {
        "r0": (float, 1.2, lambda v: v > 0, "inner radius"),
        "r1": (float, 2.0, lambda v: v > 0, "outer radius"),
        "n_r": (int, 257, lambda v: v >= 9, "radial grid size"),
        "N": (int, 16, lambda v: v >= 1, "Galerkin truncation"),
        "n_theta": (_opt_int, None, lambda v: v is None or v >= 8, "theta grid (default 4N+4)"),
        "L": (float, 16.0, lambda v: v > 0, "axisym half-length"),
        "hx": (float, 0.05, lambda v: v > 0, "axisym x3 spacing"),
    },
    "solver": {
        "l0": (float, 1.0, None, "inner boundary slope"),
        "sigma1": (_opt_float, None, lambda v: v is None or v > 0, "multiplier constant"),
        "tol": (float, 1e-10, lambda v: v > 0, "irrotational/axisym tolerance"),
        "max_iter": (int, 100, lambda v: v > 0, "iteration cap"),
        "inner_tol": (float, 1e-10, lambda v: v > 0, "rotational inner tolerance"),
        "outer_tol": (float, 1e-9, lambda v: v > 0, "rotational outer tolerance"),
    },
    "data": {
        "epsilon": (float, 1e-3, lambda v: v >= 0, "perturbation size"),
        "epsilons": (_floats, [1e-3, 2e-3, 4e-3], lambda v: len(v) >= 2 and min(v) > 0,
                     "sweep list"),
        "g0": (_profile, "cos:1", None, "U1 - l0 U2 perturbation at r0"),
        "g1": (_profile, "sin:1", None, "U2 perturbation at r1"),
        "B1": (_profile, "zero", None, "Bernoulli perturbation at r1"),
        "A1": (_profile, "zero", None, "entropy perturbation at r1"),
        "q1": (_profile, "bump:0,2", None, "axisym U1 at r0"),
        "q2": (_profile, "bump:0,2", None, "axisym U2 at r1"),
        "q3": (_profile, "bump:0,2", None, "axisym U3 at r1"),
    },
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        vals = self.__dict__.get("values", {})
        for sec in vals.values():
            if name in sec:
                return sec[name]
        raise AttributeError(name)

    def section(self, name):
        return dict(self.values[name])

    def as_dict(self):
        return {s: dict(v) for s, v in self.values.items()}

    def replace(self, **kw):
        vals = self.as_dict()
        for k, v in kw.items():
            for sec in vals.values():
                if k in sec:
                    sec[k] = v
                    break
            else:
                raise ConfigError(f"unknown key {k!r}")
        return RunConfig(vals)


def defaults():
    return RunConfig({s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()})


def _convert(section, key, raw, line):
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]", line)
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]", line)
    conv, _, check, help_ = SCHEMA[section][key]
    try:
        val = conv(raw)
    except (ValueError, TypeError, ConfigError) as exc:
        raise ConfigError(f"{section}.{key}: {exc}", line) from None
    if check is not None and not check(val):
        raise ConfigError(f"{section}.{key} = {raw!r} out of range ({help_})", line)
    return val


def _key_lines(text):
    """Map (section, key) to its 1-based line in INI text."""
    out = {}
    sec = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", s)
        if m:
            sec = m.group(1).strip()
            out.setdefault((sec, None), n)
            continue
        m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\s*[=:]", s)
        if m and sec is not None:
            out[(sec, m.group(1))] = n
    return out


def _parse_json(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(obj, dict):
        raise ConfigError("JSON config must be an object", 1)
    lines = {}
    for n, line in enumerate(text.splitlines(), 1):
        for m in re.finditer(r'"([A-Za-z_][A-Za-z0-9_]*)"\s*:', line):
            lines.setdefault(m.group(1), n)
    items = []
    for sec, body in obj.items():
        if not isinstance(body, dict):
            raise ConfigError(f"section {sec!r} must be an object", lines.get(sec))
        for k, v in body.items():
            items.append((sec, k, v, lines.get(k)))
    return items


def _parse_ini(text):
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of a [section]", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError("malformed line", lineno) from None
    lines = _key_lines(text)
    items = []
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", lines.get((sec, None)))
        for k, v in cp.items(sec):
            items.append((sec, k, v, lines.get((sec, k))))
    return items


def parse_config(text, env=None):
    """Parse and validate configuration text (INI or JSON).

    Empty text gives the defaults.  ``env`` (default ``os.environ``) supplies
    ``TA_*`` overrides.
    """
    text = text or ""
    cfg = defaults().as_dict()
    stripped = text.lstrip()
    items = _parse_json(text) if stripped.startswith("{") else _parse_ini(text)
    for sec, k, v, line in items:
        cfg.setdefault(sec, {})
        cfg[sec][k] = _convert(sec, k, v, line)
    env = os.environ if env is None else env
    for name in sorted(env):
        if not name.upper().startswith("TA_"):
            continue
        rest = name[3:]
        sec, _, key = rest.partition("_")
        sec_l = sec.lower()
        if sec_l not in SCHEMA:
            raise ConfigError(f"environment override {name}: unknown section")
        match = [k for k in SCHEMA[sec_l] if k.lower() == key.lower()]
        if not match:
            raise ConfigError(f"environment override {name}: unknown key")
        cfg[sec_l][match[0]] = _convert(sec_l, match[0], env[name], None)
    c = RunConfig(cfg)
    if not c.r0 < c.r1:
        raise ConfigError(f"need r0 < r1 (got {c.r0}, {c.r1})")
    return c


def load_config(path=None, preset=None, env=None):
    """Read a config file and/or a shipped preset (file values win)."""
    text = ""
    if preset is not None:
        text = preset_text(preset)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if preset is None:
            text = user
        else:
            # overlay: parse both and merge section by section
            base = parse_config(text, env={})
            top = parse_config(user, env={})
            merged = base.as_dict()
            dflt = defaults().as_dict()
            for s, body in top.as_dict().items():
                for k, v in body.items():
                    if v != dflt[s][k]:
                        merged[s][k] = v
            text = json.dumps(merged)
    return parse_config(text, env=env)


def preset_dir():
    return os.path.join(os.path.dirname(__file__), "presets")


def list_presets():
    return sorted(f[:-4] for f in os.listdir(preset_dir()) if f.endswith(".ini"))


def preset_text(name):
    path = os.path.join(preset_dir(), f"{name}.ini")
    if not os.path.exists(path):
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(list_presets())})")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def describe_defaults():
    """Help text listing every key with its default."""
    out = []
    for s, keys in SCHEMA.items():
        out.append(f"[{s}]")
        for k, (_, d, _, h) in keys.items():
            out.append(f"  {k} = {d}    ; {h}")
    return "\n".join(out)
