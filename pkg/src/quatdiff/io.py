"""CSV output and TOML scenario files.

CSV files start with ``#`` comment lines recording the tool version, the
fully resolved configuration (JSON) and the RNG seed. Floats are written with
``repr`` so that parsing and re-emitting a file reproduces it byte for byte.
"""

import csv
import io as _io
import json
import math
import os
import re
import sys
from importlib import resources

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .controller import ControllerConfig
from .dynamics import ErrorState
from .errors import QuatDiffError, ScenarioError
from .sim import CLOSED_LOOP, NOMINAL_FLOW, SimConfig
from .trajectory import CubicSplineSignal, PolynomialSignal, SinusoidSignal, TrajectoryParams

SCENARIO_VERSION = 1
CSV_SCHEMA_VERSION = 1


# -- CSV ---------------------------------------------------------------------


def format_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def header_lines(config=None, seed=None):
    return [
        f"tool: quatdiff {__version__}",
        f"schema: {CSV_SCHEMA_VERSION}",
        "config: " + json.dumps(config if config is not None else {}, sort_keys=True),
        f"seed: {seed if seed is not None else 'none'}",
    ]


def write_csv(path_or_file, columns, rows, config=None, seed=None):
    """Write ``rows`` under ``columns`` with the standard comment header."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        for line in header_lines(config, seed):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(x) for x in row])
    finally:
        if own:
            fh.close()


def csv_text(columns, rows, config=None, seed=None):
    buf = _io.StringIO()
    write_csv(buf, columns, rows, config, seed)
    return buf.getvalue()


def _parse_cell(s):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path_or_text):
    """Parse a file written by :func:`write_csv`.

    Returns ``(header, columns, rows)`` where ``header`` maps comment keys to
    their raw string values and ``rows`` is a list of lists of parsed cells.
    """
    if "\n" in str(path_or_text):
        text = str(path_or_text)
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    header = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            header[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return header, columns, rows


def header_config(header):
    return json.loads(header.get("config", "{}"))


# -- scenarios ---------------------------------------------------------------

_SCHEMA = {
    "": {"version", "name", "scenario", "sim", "trajectory", "controller",
         "initial_error", "nominal"},
    "sim": {"dt_s", "t_final_s", "renormalize_every", "snapshot_stride"},
    "trajectory": {"phi_rad", "alpha", "beta"},
    "controller": {"k", "L", "r", "eps_ev", "canonicalize", "design"},
    "initial_error": {"axis", "angle_rad", "velocity"},
    "nominal": {"e0", "ev", "w_rad_s", "state_form"},
}
_SIGNAL_SCHEMA = {
    "polynomial": {"kind", "coefficients"},
    "sinusoid": {"kind", "amplitude_rad", "omega_rad_s", "phase_rad", "offset_rad"},
    "cubic_spline": {"kind", "knots_s", "values_rad", "bc_type"},
}


def _locate(text, section, key):
    """1-based line of ``key`` inside ``[section]`` (``""`` for the top level), or None."""
    current = ""
    header_re = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]")
    key_re = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i, line in enumerate(text.splitlines(), start=1):
        m = header_re.match(line)
        if m:
            current = m.group(1)
            if key and current == (f"{section}.{key}" if section else key):
                return i
            continue
        if current == section and key_re.match(line):
            return i
    return None


class _Reader:
    def __init__(self, text, source):
        self.text = text
        self.source = source

    def fail(self, section, key, message):
        raise ScenarioError(message, line=_locate(self.text, section, key), source=self.source)

    def check_keys(self, section, table, allowed):
        for key in table:
            if key not in allowed:
                self.fail(section, key, f"unknown key {key!r}" + (f" in [{section}]" if section else ""))

    def number(self, section, table, key, default=None):
        if key not in table:
            if default is None:
                self.fail(section, "", f"missing key {key!r}" + (f" in [{section}]" if section else ""))
            return default
        value = table[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(section, key, f"{key} must be a number")
        return float(value)

    def vector(self, section, table, key, n=3, default=None):
        if key not in table:
            if default is None:
                self.fail(section, "", f"missing key {key!r} in [{section}]")
            return default
        value = table[key]
        if (not isinstance(value, list) or len(value) != n
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
            self.fail(section, key, f"{key} must be a list of {n} numbers")
        return [float(x) for x in value]

    def signal(self, section, table):
        if not isinstance(table, dict):
            self.fail(section.rpartition(".")[0], section.rpartition(".")[2], "signal must be a table")
        kind = table.get("kind")
        if kind not in _SIGNAL_SCHEMA:
            self.fail(section, "kind", f"signal kind must be one of {sorted(_SIGNAL_SCHEMA)}")
        self.check_keys(section, table, _SIGNAL_SCHEMA[kind])
        try:
            if kind == "polynomial":
                coeffs = table.get("coefficients")
                if not isinstance(coeffs, list) or not coeffs:
                    self.fail(section, "coefficients", "coefficients must be a non-empty list")
                return PolynomialSignal(coeffs)
            if kind == "sinusoid":
                return SinusoidSignal(
                    self.number(section, table, "amplitude_rad"),
                    self.number(section, table, "omega_rad_s"),
                    self.number(section, table, "phase_rad", 0.0),
                    self.number(section, table, "offset_rad", 0.0),
                )
            return CubicSplineSignal(table.get("knots_s", []), table.get("values_rad", []),
                                     table.get("bc_type", "not-a-knot"))
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            self.fail(section, "kind", f"invalid signal: {exc}")


def parse_scenario(text, source="<scenario>"):
    """Build a :class:`SimConfig` from TOML scenario text.

    Raises:
        ScenarioError: on syntax errors, unknown or missing keys, or invalid
            values; the message carries the source name and line number.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ScenarioError(f"syntax error: {exc}", line=int(m.group(1)) if m else None,
                            source=source) from None
    rd = _Reader(text, source)
    rd.check_keys("", doc, _SCHEMA[""])
    for section in ("sim", "trajectory", "controller", "initial_error", "nominal"):
        if section in doc:
            if not isinstance(doc[section], dict):
                rd.fail("", section, f"{section} must be a table")
            rd.check_keys(section, doc[section], _SCHEMA[section])

    version = doc.get("version")
    if version != SCENARIO_VERSION:
        rd.fail("", "version", f"unsupported scenario version {version!r}, expected {SCENARIO_VERSION}")
    scenario = doc.get("scenario", CLOSED_LOOP)
    if scenario not in (CLOSED_LOOP, NOMINAL_FLOW):
        rd.fail("", "scenario", f"scenario must be {CLOSED_LOOP!r} or {NOMINAL_FLOW!r}")

    kwargs = {"scenario": scenario}
    sim = doc.get("sim", {})
    kwargs["dt"] = rd.number("sim", sim, "dt_s", 1e-3)
    kwargs["t_final"] = rd.number("sim", sim, "t_final_s", 20.0)
    for key in ("renormalize_every", "snapshot_stride"):
        if key in sim:
            if not isinstance(sim[key], int) or isinstance(sim[key], bool) or sim[key] < 0:
                rd.fail("sim", key, f"{key} must be a non-negative integer")
            kwargs[key] = sim[key]

    if "trajectory" in doc:
        tr = doc["trajectory"]
        phi = rd.number("trajectory", tr, "phi_rad", 0.0)
        if not abs(phi) < math.pi / 2:
            rd.fail("trajectory", "phi_rad", "|phi_rad| must be below pi/2")
        for name in ("alpha", "beta"):
            if name not in tr:
                rd.fail("trajectory", "", f"missing signal [trajectory.{name}]")
        kwargs["trajectory"] = TrajectoryParams(
            phi, rd.signal("trajectory.alpha", tr["alpha"]), rd.signal("trajectory.beta", tr["beta"]))

    if "controller" in doc:
        c = doc["controller"]
        ckw = {}
        for key in ("k", "r", "eps_ev"):
            if key in c:
                ckw[key] = rd.number("controller", c, key)
        if "L" in c:
            L = c["L"]
            ok = (isinstance(L, list) and len(L) == 3
                  and all(isinstance(row, list) and len(row) == 3 for row in L))
            if not ok:
                rd.fail("controller", "L", "L must be a 3x3 nested list")
            ckw["L"] = np.array(L, dtype=float)
        if "canonicalize" in c:
            if not isinstance(c["canonicalize"], bool):
                rd.fail("controller", "canonicalize", "canonicalize must be true or false")
            ckw["canonicalize"] = c["canonicalize"]
        if "design" in c:
            if c["design"] not in ("accel_law", "blended"):
                rd.fail("controller", "design", "design must be 'accel_law' or 'blended'")
            kwargs["design"] = c["design"]
        try:
            kwargs["controller"] = ControllerConfig(**ckw)
        except (ValueError, QuatDiffError) as exc:
            rd.fail("controller", next(iter(c), ""), f"invalid controller: {exc}")

    if "initial_error" in doc:
        ie = doc["initial_error"]
        if "axis" in ie:
            axis = np.array(rd.vector("initial_error", ie, "axis"))
            n = np.linalg.norm(axis)
            if n == 0.0:
                rd.fail("initial_error", "axis", "axis must be nonzero")
            kwargs["initial_axis"] = tuple(axis / n)
        kwargs["initial_angle"] = rd.number("initial_error", ie, "angle_rad", 1.0)
        if "velocity" in ie:
            if ie["velocity"] not in ("compliant", "reference"):
                rd.fail("initial_error", "velocity", "velocity must be 'compliant' or 'reference'")
            kwargs["initial_velocity"] = ie["velocity"]

    if "nominal" in doc:
        nm = doc["nominal"]
        ev = rd.vector("nominal", nm, "ev")
        w = rd.vector("nominal", nm, "w_rad_s")
        try:
            if "e0" in nm:
                state = ErrorState(rd.number("nominal", nm, "e0"), ev, w)
            else:
                state = ErrorState.from_reduced(ev, w)
        except QuatDiffError as exc:
            rd.fail("nominal", "e0" if "e0" in nm else "ev", f"invalid nominal state: {exc}")
        kwargs["nominal_initial"] = state
        if "state_form" in nm:
            if nm["state_form"] not in ("reduced", "full", "auto"):
                rd.fail("nominal", "state_form", "state_form must be 'reduced', 'full' or 'auto'")
            kwargs["nominal_state_form"] = nm["state_form"]
    elif scenario == NOMINAL_FLOW:
        rd.fail("", "", "NominalFlow scenario needs a [nominal] table")

    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"invalid configuration: {exc}", source=source) from None


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    files = resources.files("quatdiff").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def load_scenario(name_or_path):
    """Load a scenario by file path, or by bundled name when no such file exists."""
    if os.path.exists(name_or_path):
        with open(name_or_path, encoding="utf-8") as fh:
            return parse_scenario(fh.read(), source=str(name_or_path))
    name = name_or_path[:-5] if name_or_path.endswith(".toml") else name_or_path
    if name in bundled_scenarios():
        res = resources.files("quatdiff").joinpath("scenarios", name + ".toml")
        return parse_scenario(res.read_text(encoding="utf-8"), source=f"{name}.toml")
    raise ScenarioError(f"no scenario file or bundled scenario named {name_or_path!r}")
