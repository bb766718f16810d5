"""Experiment config files.

Grammar (line oriented, ``#`` starts a comment)::

    file     := { line }
    line     := blank | section | pair
    section  := "[" name "]"            name in params, region, failure, sweep
    pair     := key "=" value
    value    := number | "10^" number | word | list
    list     := value { "," value } | int ".." int     (inclusive integer range)

Top-level keys (before any section): name, mode (analytic|simulate|both),
seed, replications, reallocation (true|false), outputs (list of csv, json, svg).
``[params]``: lambda_bs, lambda_u, alpha, c, w_tot_density, k.
``[region]``: width, height, boundary (plain|torus).
``[failure]``: kind (random|overload|distance|los), value, blockage_constant.
``[sweep]``: path (e.g. ``params.k`` or ``failure.value``), values.

An empty file gives the defaults: mode both, k = 1, a 500 m x 500 m plain region.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .analytic import NetworkParams
from .failures import FailureKind, FailureModel
from .pointprocess import Boundary, Region
from .simulator import DESK_REGION, SimConfig


class ConfigError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line
        self.col = col


class Mode(str, enum.Enum):
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    BOTH = "both"


class Output(str, enum.Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


SWEEPABLE = {
    "params.lambda_bs", "params.lambda_u", "params.alpha", "params.c",
    "params.w_tot_density", "params.k",
    "region.width", "region.height",
    "failure.value", "failure.blockage_constant",
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "experiment"
    mode: Mode = Mode.BOTH
    params: NetworkParams = NetworkParams()
    region: Region = DESK_REGION
    failure: Optional[FailureModel] = None
    reallocation: bool = False
    replications: int = 1
    seed: int = 0
    sweep: Optional[tuple] = None  # (path, values)
    outputs: tuple = (Output.CSV, Output.JSON, Output.SVG)

    def sim_config(self) -> SimConfig:
        return SimConfig(self.params, self.region, self.failure, self.reallocation,
                         self.replications, self.seed)

    def expand(self) -> list:
        """One spec per sweep value (or just self when there is no sweep)."""
        if self.sweep is None:
            return [self]
        path, values = self.sweep
        return [set_path(replace(self, sweep=None), path, v) for v in values]

    def to_dict(self) -> dict:
        d = self.sim_config().to_dict()
        d.update(name=self.name, mode=self.mode.value,
                 sweep=None if self.sweep is None else {"path": self.sweep[0], "values": list(self.sweep[1])},
                 outputs=[o.value for o in self.outputs])
        return d


def set_path(spec: ExperimentSpec, path: str, value) -> ExperimentSpec:
    if path not in SWEEPABLE:
        raise ValueError(f"cannot sweep {path!r}; choose from {sorted(SWEEPABLE)}")
    head, attr = path.split(".")
    if head == "params":
        return replace(spec, params=spec.params.replace(**{attr: value}))
    if head == "region":
        return replace(spec, region=replace(spec.region, **{attr: float(value)}))
    if spec.failure is None:
        raise ValueError(f"sweep over {path} needs a [failure] section")
    return replace(spec, failure=replace(spec.failure, **{attr: float(value)}))


# -- parsing ----------------------------------------------------------------

_NUM = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RANGE = re.compile(r"^([+-]?\d+)\s*\.\.\s*([+-]?\d+)$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_FLOAT, _INT, _BOOL, _WORD, _NUMLIST, _WORDLIST = range(6)
SCHEMA = {
    None: {"name": _WORD, "mode": _WORD, "seed": _INT, "replications": _INT,
           "reallocation": _BOOL, "outputs": _WORDLIST},
    "params": {"lambda_bs": _FLOAT, "lambda_u": _FLOAT, "alpha": _FLOAT, "c": _FLOAT,
               "w_tot_density": _FLOAT, "k": _INT},
    "region": {"width": _FLOAT, "height": _FLOAT, "boundary": _WORD},
    "failure": {"kind": _WORD, "value": _FLOAT, "blockage_constant": _FLOAT},
    "sweep": {"path": _WORD, "values": _NUMLIST},
}


def _number(text, key, line, col):
    t = text.strip()
    if t.startswith("10^"):
        exp = t[3:]
        if _NUM.match(exp):
            return 10.0 ** float(exp)
    elif _NUM.match(t):
        return float(t)
    raise ConfigError(f"{key}: expected a number, got {t!r}", line, col)


def _convert(kind, text, key, line, col):
    if kind == _FLOAT:
        return _number(text, key, line, col)
    if kind == _INT:
        if re.match(r"^[+-]?\d+$", text):
            return int(text)
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line, col)
    if kind == _BOOL:
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true or false, got {text!r}", line, col)
    if kind == _WORD:
        if not text or "," in text:
            raise ConfigError(f"{key}: expected a single word, got {text!r}", line, col)
        return text
    if kind == _WORDLIST:
        return [w.strip() for w in text.split(",") if w.strip()]
    m = _RANGE.match(text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise ConfigError(f"{key}: empty range {text!r}", line, col)
        return list(range(lo, hi + 1))
    out = []
    for part in text.split(","):
        v = _number(part, key, line, col)
        out.append(int(v) if v.is_integer() and "." not in part and "e" not in part.lower() else v)
    return out


def parse_config(text: str) -> ExperimentSpec:
    raw = {}  # (section, key) -> (value, line, col)
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].rstrip()
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, col)
            name = stripped[1:-1].strip()
            if name not in SCHEMA or name is None:
                raise ConfigError(f"unknown section [{name}]", lineno, col)
            section = name
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key = value, got {stripped!r}", lineno, col)
        key, _, value = body.partition("=")
        vcol = len(key) + 2 + (len(value) - len(value.lstrip()))
        key = key.strip()
        value = value.strip()
        if not _KEY.match(key):
            raise ConfigError(f"malformed key {key!r}", lineno, col)
        kind = SCHEMA[section].get(key)
        if kind is None:
            where = f"[{section}]" if section else "top level"
            raise ConfigError(f"unknown key {key!r} in {where}", lineno, col)
        if (section, key) in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno, col)
        raw[(section, key)] = (_convert(kind, value, key, lineno, vcol), lineno, col)
    return _build(raw)


def _build(raw) -> ExperimentSpec:
    def get(section, key, default=None):
        return raw[(section, key)][0] if (section, key) in raw else default

    def where(*keys):
        for k in keys:
            if k in raw:
                return raw[k][1], raw[k][2]
        return None, None

    def guarded(fn, keys):
        try:
            return fn()
        except ValueError as exc:
            # point at the key the message names, if any
            named = [k for k in keys if k in raw and str(exc).startswith(k[1])]
            raise ConfigError(str(exc), *where(*(named or keys))) from None

    def enum_of(cls, section, key, default):
        v = get(section, key)
        if v is None:
            return default
        try:
            return cls(v.lower())
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise ConfigError(f"{key}: {v!r} is not one of {allowed}", *where((section, key))) from None

    pkeys = [("params", k) for k in SCHEMA["params"]]
    params = guarded(lambda: NetworkParams(**{k: get("params", k) for _, k in pkeys
                                              if ("params", k) in raw}), pkeys)
    boundary = enum_of(Boundary, "region", "boundary", Boundary.PLAIN)
    rkeys = [("region", "width"), ("region", "height")]
    region = guarded(lambda: Region(get("region", "width", DESK_REGION.width),
                                    get("region", "height", DESK_REGION.height), boundary), rkeys)

    failure = None
    if any(s == "failure" for s, _ in raw):
        fkeys = [("failure", "kind"), ("failure", "value"), ("failure", "blockage_constant")]
        if ("failure", "kind") not in raw or ("failure", "value") not in raw:
            line, col = where(*fkeys)
            raise ConfigError("[failure] needs both kind and value", line, col)
        kind = enum_of(FailureKind, "failure", "kind", None)
        failure = guarded(lambda: FailureModel(kind, get("failure", "value"),
                                               get("failure", "blockage_constant", 18.0)), fkeys)

    outputs = tuple(Output.__members__.values())
    if (None, "outputs") in raw:
        try:
            outputs = tuple(Output(o.lower()) for o in get(None, "outputs"))
        except ValueError as exc:
            raise ConfigError(f"outputs: {exc}", *where((None, "outputs"))) from None

    sweep = None
    if any(s == "sweep" for s, _ in raw):
        skeys = [("sweep", "path"), ("sweep", "values")]
        path, values = get("sweep", "path"), get("sweep", "values")
        if path is None or not values:
            raise ConfigError("[sweep] needs path and a non-empty values list", *where(*skeys))
        if path not in SWEEPABLE:
            raise ConfigError(f"sweep path {path!r} is not a numeric field; choose from "
                              f"{', '.join(sorted(SWEEPABLE))}", *where(("sweep", "path")))
        if path.startswith("failure.") and failure is None:
            raise ConfigError(f"sweep over {path} needs a [failure] section", *where(("sweep", "path")))
        sweep = (path, tuple(values))

    spec = ExperimentSpec(
        name=get(None, "name", "experiment"),
        mode=enum_of(Mode, None, "mode", Mode.BOTH),
        params=params, region=region, failure=failure,
        reallocation=get(None, "reallocation", False),
        replications=get(None, "replications", 1),
        seed=get(None, "seed", 0),
        sweep=sweep, outputs=outputs,
    )
    # replications / seed constraints live on SimConfig
    guarded(spec.sim_config, [(None, "replications"), (None, "seed")])
    if sweep is not None:
        # every point must build
        for v in sweep[1]:
            guarded(lambda v=v: set_path(spec, sweep[0], v), [("sweep", "values")])
    return spec


def load_config(path) -> ExperimentSpec:
    with open(path) as fh:
        return parse_config(fh.read())
