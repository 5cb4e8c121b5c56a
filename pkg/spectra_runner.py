"""
Spectral experiment runner: reads a YAML run config, runs one command and writes CSV (and optional SVG) artifacts.
"""

import argparse
import copy
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from os.path import join
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

import slspectra
from slspectra import asymptotics, density, spectral_class
from slspectra.core import BoundaryVector, Frame, ModulationKind, SLParams
from slspectra.errors import ConfigError, NotInBandError, ParameterError, SLSpectraError
from slspectra.families import FAMILY_REGISTRY, make_family, registered_families
from slspectra.families.utils.diagnostics import carleman_rho
from utils import Utils

logger = logging.getLogger("slspectra.runner")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("classify", "trace-scan", "bands", "turan", "phi", "density", "dos", "eigcount", "cauchy",
            "example1-check", "minimal")
FAMILY_KEYS = ("kappa", "c", "omega", "a", "b", "q0")
_MISSING = object()
_PI_RE = re.compile(r"^\s*([+-]?)\s*((?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$")


@dataclass(frozen=True)
class Option:
    kind: str  # float, int, bool, str, floats, ints, pair, pairs
    default: Any = _MISSING
    check: Optional[Callable[[Any], Optional[str]]] = None
    choices: Tuple[str, ...] = ()

    @property
    def required(self) -> bool: return self.default is _MISSING


def _positive(v) -> Optional[str]: return None if v is None or v > 0 else "must be positive"


def _at_least(n: int) -> Callable[[Any], Optional[str]]:
    return lambda v: None if v >= n else f"must be at least {n}"


def _nonzero_pairs(v) -> Optional[str]:
    pairs = v if v and isinstance(v[0], (list, tuple)) else [v]
    return None if all(math.hypot(*p) > 0 for p in pairs) else "boundary vectors must be non-zero"


def _increasing_positive(v) -> Optional[str]:
    if not v or any(n <= 0 for n in v) or any(b <= a for a, b in zip(v, v[1:])):
        return "must be a non-empty, positive, strictly increasing list"
    return None


def _window(v) -> Optional[str]: return None if v[0] < v[1] else "needs a < b"


COMMAND_OPTIONS: Dict[str, Dict[str, Option]] = {
    "classify": {"frame": Option("str", None, choices=("DPrime", "PDPrime"))},
    "trace-scan": {"param": Option("str"), "lo": Option("float"), "hi": Option("float"),
                   "count": Option("int", 401, _at_least(2)), "target": Option("float", -2.0)},
    "bands": {"lambda_min": Option("float"), "lambda_max": Option("float"),
              "scan_step": Option("float", None, _positive), "edge_tol": Option("float", 1e-9, _positive)},
    "turan": {"t": Option("float", 0.0), "z": Option("float", 0.0), "eta": Option("pair", [1.0, 0.0], _nonzero_pairs),
              "n_max": Option("int", 200, _at_least(1)), "check_case": Option("bool", True)},
    "phi": {"t": Option("float", 0.0), "z": Option("float", 0.0), "eta": Option("pair", [1.0, 0.0], _nonzero_pairs),
            "n_max": Option("int", 200, _at_least(1)), "floor": Option("float", 1e-8, _positive)},
    "density": {"lambdas": Option("floats"), "eta": Option("pair", [1.0, 0.0], _nonzero_pairs),
                "periods": Option("ints", list(range(10, 201, 10)), _increasing_positive), "offset": Option("float", 0.0)},
    "dos": {"window": Option("pair", check=_window), "periods": Option("ints", check=_increasing_positive),
            "offset": Option("float", 0.0), "eta": Option("pair", [0.0, 1.0], _nonzero_pairs),
            "count_method": Option("str", "scan", choices=("scan", "prufer")), "step": Option("float", None, _positive)},
    "eigcount": {"window": Option("pair", check=_window), "L": Option("float", check=_positive),
                 "eta": Option("pair", [0.0, 1.0], _nonzero_pairs),
                 "count_method": Option("str", "scan", choices=("scan", "prufer")), "step": Option("float", None, _positive)},
    "cauchy": {"z_re": Option("float", 0.0), "z_im": Option("float", check=lambda v: None if v != 0 else "must be non-zero"),
               "periods": Option("ints", check=_increasing_positive), "offset": Option("float", 0.0),
               "eta": Option("pair", [0.0, 1.0], _nonzero_pairs)},
    "example1-check": {"lambdas": Option("floats"), "ts": Option("floats", [0.0]),
                       "etas": Option("pairs", [[1.0, 0.0], [0.0, 1.0]], _nonzero_pairs),
                       "periods": Option("ints", list(range(10, 201, 10)), _increasing_positive)},
    "minimal": {"z_re": Option("float", 0.0), "z_im": Option("float", 0.0), "n_max": Option("int", 40, _at_least(4)),
                "t": Option("float", 0.0)},
}

TOLERANCE_OPTIONS = {"tol": Option("float", 1e-10, _positive), "eps_case": Option("float", 1e-6, _positive),
                     "delta": Option("float", 1e-3, _positive)}


def section_name(command: str) -> str: return command.replace("-", "_")


@dataclass
class RunConfig:
    command: str
    family_name: str
    family_params: Dict[str, float]
    params: SLParams
    options: Dict[str, Any]
    tol: float = 1e-10
    eps_case: float = 1e-6
    delta: float = 1e-3
    out_dir: str = "Results"
    plot: bool = False
    run_id: str = ""
    jobs: int = 1

    def effective(self) -> Dict[str, Any]:
        """Every setting that can change a result, defaults included."""
        return {"command": self.command,
                "family": {"name": self.family_name, **self.params.family_params},
                "tolerances": {"tol": self.tol, "eps_case": self.eps_case, "delta": self.delta},
                section_name(self.command): self.options}


class Config:
    """Strict YAML run-config parser; every error names its line."""

    def __init__(self, text: str, out_dir: Optional[str] = None, jobs: Optional[int] = None, plot: Optional[bool] = None):
        self.text = text
        self.overrides = {"out_dir": out_dir, "jobs": jobs, "plot": plot}

    @staticmethod
    def _line(node) -> int: return node.start_mark.line + 1

    def _mapping(self, node, where: str) -> Dict[str, Tuple[Any, Any]]:
        if not isinstance(node, yaml.MappingNode):
            raise ConfigError(f"{where} must be a mapping", self._line(node))
        out: Dict[str, Tuple[Any, Any]] = {}
        for key_node, value_node in node.value:
            key = key_node.value
            if key in out:
                raise ConfigError(f"duplicate key '{key}' in {where}", self._line(key_node))
            out[key] = (key_node, value_node)
        return out

    def _float(self, node, key: str) -> float:
        if not isinstance(node, yaml.ScalarNode) or node.tag.endswith(":bool") or node.tag.endswith(":null"):
            raise ConfigError(f"'{key}' must be a number", self._line(node))
        match = _PI_RE.match(node.value)
        if match:
            sign = -1.0 if match.group(1) == "-" else 1.0
            return sign * float(match.group(2) or 1.0) * math.pi
        try:
            value = float(node.value)
        except ValueError:
            raise ConfigError(f"'{key}' must be a number, got '{node.value}'", self._line(node))
        if not math.isfinite(value):
            raise ConfigError(f"'{key}' must be finite", self._line(node))
        return value

    def _int(self, node, key: str) -> int:
        # YAML 1.1 integer forms: 0x1f, 0b101, 010 (octal), 1_000, 1:30 (base 60)
        try:
            value = yaml.SafeLoader("").construct_yaml_int(node)
        except ValueError:
            value = None
        if not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got '{node.value}'", self._line(node))
        return value

    def _value(self, node, opt: Option, key: str) -> Any:
        if isinstance(node, yaml.ScalarNode) and node.tag.endswith(":null"):
            if opt.default is None:
                return None
            raise ConfigError(f"'{key}' may not be null", self._line(node))
        if opt.kind == "float":
            return self._float(node, key)
        if opt.kind in ("int", "bool", "str"):
            tag = {"int": ":int", "bool": ":bool", "str": ":str"}[opt.kind]
            if not isinstance(node, yaml.ScalarNode) or not node.tag.endswith(tag):
                raise ConfigError(f"'{key}' must be of type {opt.kind}", self._line(node))
            if opt.kind == "int":
                return self._int(node, key)
            if opt.kind == "bool":
                return node.value.lower() in ("true", "yes", "on")
            if opt.choices and node.value not in opt.choices:
                raise ConfigError(f"'{key}' must be one of {list(opt.choices)}, got '{node.value}'", self._line(node))
            return node.value
        if not isinstance(node, yaml.SequenceNode):
            raise ConfigError(f"'{key}' must be a list", self._line(node))
        if opt.kind == "floats":
            return [self._float(item, key) for item in node.value]
        if opt.kind == "ints":
            return [self._value(item, Option("int"), key) for item in node.value]
        if opt.kind == "pair":
            if len(node.value) != 2:
                raise ConfigError(f"'{key}' must have exactly two entries", self._line(node))
            return [self._float(item, key) for item in node.value]
        return [self._value(item, Option("pair"), key) for item in node.value]

    def _section(self, node, schema: Mapping[str, Option], where: str) -> Dict[str, Any]:
        entries = self._mapping(node, where) if node is not None else {}
        out = {}
        for key, (key_node, value_node) in entries.items():
            if key not in schema:
                raise ConfigError(f"unknown key '{key}' in {where}", self._line(key_node))
            value = self._value(value_node, schema[key], key)
            problem = schema[key].check(value) if schema[key].check and value is not None else None
            if problem:
                raise ConfigError(f"'{key}' {problem}", self._line(value_node))
            out[key] = value
        for key, opt in schema.items():
            if key not in out:
                if opt.required:
                    raise ConfigError(f"missing required key '{key}' in {where}", self._line(node) if node is not None else None)
                out[key] = copy.deepcopy(opt.default)
        return out

    def _family(self, node) -> Tuple[str, Dict[str, float], SLParams]:
        entries = self._mapping(node, "family")
        if "name" not in entries:
            raise ConfigError("missing required key 'name' in family", self._line(node))
        name_node = entries["name"][1]
        name = self._value(name_node, Option("str"), "name")
        if name not in registered_families():
            raise ConfigError(f"unknown family '{name}'; known families: {registered_families()}", self._line(name_node))
        given = {}
        for key, (key_node, value_node) in entries.items():
            if key == "name":
                continue
            if key not in FAMILY_KEYS:
                raise ConfigError(f"unknown key '{key}' in family", self._line(key_node))
            given[key] = self._float(value_node, key)
        try:
            params = make_family(name, given)
        except ParameterError as e:
            culprit = next((k for k in given if re.search(rf"\b{k}\b", str(e))), None)
            line = self._line(entries[culprit][1]) if culprit else self._line(node)
            raise ConfigError(f"family {name}: {e}", line)
        return name, given, params

    def parse(self) -> RunConfig:
        try:
            root = yaml.compose(self.text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(f"invalid YAML: {getattr(e, 'problem', None) or e}", mark.line + 1 if mark else None)
        if root is None:
            raise ConfigError("the config is empty")
        top = self._mapping(root, "config")
        if "command" not in top:
            raise ConfigError("missing required key 'command'", self._line(root))
        command_node = top["command"][1]
        command = self._value(command_node, Option("str"), "command")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command '{command}'; expected one of {list(COMMANDS)}", self._line(command_node))
        if "family" not in top:
            raise ConfigError("missing required key 'family'", self._line(root))
        section = section_name(command)
        for key, (key_node, _) in top.items():
            if key in ("command", "family", "tolerances", "output", "jobs", section):
                continue
            if key in {section_name(c) for c in COMMANDS}:
                raise ConfigError(f"section '{key}' does not apply to command '{command}'", self._line(key_node))
            raise ConfigError(f"unknown key '{key}'", self._line(key_node))

        name, given, params = self._family(top["family"][1])
        tolerances = self._section(top.get("tolerances", (None, None))[1], TOLERANCE_OPTIONS, "tolerances")
        options = self._section(top.get(section, (None, None))[1], COMMAND_OPTIONS[command], section)
        output = self._section(top.get("output", (None, None))[1],
                               {"dir": Option("str", os.getenv("SLSPECTRA_OUT_DIR", "Results")),
                                "plot": Option("bool", False), "run_id": Option("str", f"{command}-{name}")}, "output")
        jobs = int(os.getenv("SLSPECTRA_JOBS", "1"))
        if "jobs" in top:
            jobs = self._value(top["jobs"][1], Option("int"), "jobs")
        self._command_checks(command, options, params, top.get(section, (None, root))[1])

        overrides = self.overrides
        jobs = overrides["jobs"] if overrides["jobs"] is not None else jobs
        if jobs < 1:
            raise ConfigError("'jobs' must be at least 1", self._line(top["jobs"][1]) if "jobs" in top else None)
        return RunConfig(command=command, family_name=name, family_params=given, params=params, options=options,
                         tol=tolerances["tol"], eps_case=tolerances["eps_case"], delta=tolerances["delta"],
                         out_dir=overrides["out_dir"] or output["dir"], plot=bool(overrides["plot"] or output["plot"]),
                         run_id=output["run_id"], jobs=jobs)

    def _command_checks(self, command: str, options: Dict[str, Any], params: SLParams, node):
        line = self._line(node) if node is not None else None
        if command == "trace-scan":
            presets = FAMILY_REGISTRY[params.name].kwargs
            if options["param"] not in params.family_params or options["param"] in presets:
                raise ConfigError(f"'{options['param']}' is not a free parameter of family {params.name}", line)
            if not options["lo"] < options["hi"]:
                raise ConfigError("trace-scan needs lo < hi", line)
        if command == "bands" and not options["lambda_min"] < options["lambda_max"]:
            raise ConfigError("bands needs lambda_min < lambda_max", line)
        if command in ("turan", "phi", "minimal") and not 0 <= options["t"] <= params.omega:
            raise ConfigError(f"'t' must lie in [0, omega = {params.omega!r}]", line)
        if command == "example1-check" and any(not 0 <= t <= params.omega for t in options["ts"]):
            raise ConfigError(f"every entry of 'ts' must lie in [0, omega = {params.omega!r}]", line)


def parse_config(text: str, out_dir: Optional[str] = None, jobs: Optional[int] = None,
                 plot: Optional[bool] = None) -> RunConfig:
    return Config(text, out_dir, jobs, plot).parse()


class RunLogger:

    def __init__(self, base_path: str, run_id: str):
        self.base_path = base_path
        self.run_id = run_id
        self.log_path = join(base_path, str(run_id), "log.txt")

    def log(self, level: str, *args, save_log: bool = True) -> None:
        """Log message with specified level"""
        message = ' '.join(str(arg) for arg in args)
        logger.log(logging.getLevelName(level.upper()), message)
        if save_log:
            Utils.append_file(f"{level.upper()} {message}", self.log_path)


def _free_params(params: SLParams) -> Dict[str, float]:
    presets = FAMILY_REGISTRY[params.name].kwargs
    return {k: v for k, v in params.family_params.items() if k not in presets}


def _density_task(family: str, free: Dict[str, float], eta: Tuple[float, float], lam: float,
                  schedule: List[float], tol: float) -> density.DensityReport:
    params = make_family(family, free)
    return density.spectral_density(params, BoundaryVector.for_params(params, *eta), lam, schedule, tol)


class SpectraRunner:
    """
    Runs one configured command and writes its artifacts to <out>/<run_id>/.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.params
        self.options = config.options
        self.run_dir = join(config.out_dir, config.run_id)
        self.logger = RunLogger(config.out_dir, config.run_id)
        self.console = Console()
        self.M: Optional[int] = None

    # helpers
    def _eta(self, pair: Sequence[float]) -> BoundaryVector:
        return BoundaryVector.for_params(self.params, *pair)

    def _schedule(self, periods: Sequence[int], offset: float = 0.0) -> List[float]:
        return density.period_schedule(self.params, periods, offset)

    def _header(self, extra: Optional[Dict[str, Any]] = None) -> List[str]:
        lines = [f"slspectra {slspectra.__version__}"]
        lines += yaml.safe_dump(self.config.effective(), sort_keys=True, default_flow_style=False).splitlines()
        lines.append(f"adaptive: M={'n/a' if self.M is None else self.M}, delta={self.config.delta!r}")
        for key, value in (extra or {}).items():
            lines.append(f"{key}: {Utils.format_value(value)}")
        return lines

    def _write(self, name: str, columns: Sequence[str], rows: Sequence[Sequence], extra: Optional[Dict[str, Any]] = None):
        path = join(self.run_dir, name)
        Utils.write_csv(path, columns, rows, self._header(extra))
        self.logger.log("INFO", f"wrote {len(rows)} rows to {path}")

    def _plot(self, name: str, xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str,
              hlines: Sequence[float] = ()):
        if not self.config.plot:
            return
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        keep = np.isfinite(xs) & np.isfinite(ys)
        path = join(self.run_dir, name)
        Utils.save_svg(xs[keep], ys[keep], path, xlabel, ylabel, f"{self.config.command}: {self.params.name}", hlines)
        self.logger.log("INFO", f"wrote plot {path}")

    # commands
    def _run_classify(self):
        frame = Frame(self.options["frame"]) if self.options["frame"] else None
        label = spectral_class.classify(self.params, frame, self.config.eps_case, self.config.tol)
        kappa = self.params.family_params.get("kappa") if self.params.name in ("example2", "example4") else None
        verdict = spectral_class.case_verdict(label, kappa)
        self.console.print(f"[bold]{self.params.name}[/bold]: {verdict}")
        self.logger.log("INFO", f"tr T(omega; 0) = {label.trace_value!r}; {verdict}")
        self._write("classify.csv", ["family", "tag", "trace", "distance", "marginal", "verdict"],
                    [[self.params.name, label.tag.value, label.trace_value, label.distance_to_boundary,
                      label.marginal, verdict]])

    def _run_trace_scan(self):
        o = self.options
        fixed = {k: v for k, v in _free_params(self.params).items() if k != o["param"]}
        scan = spectral_class.trace_scan(self.params.name, (o["param"], o["lo"], o["hi"], o["count"]), fixed,
                                         self.config.tol, self.config.jobs)
        roots = spectral_class.critical_parameters(scan, fixed, o["target"], tol=self.config.tol)
        for root in roots:
            self.logger.log("INFO", f"tr T(omega; 0) = {o['target']} at {o['param']} = {root!r}")
        self._write("trace_scan.csv", ["param", "trace"], scan.series(), {"failures": len(scan.failures)})
        self._write("roots.csv", ["target", "root", "a"],
                    [[o["target"], r, spectral_class.a_crit(r) if o["param"] == "kappa" and 0 < r < 1 else None]
                     for r in roots])
        self._plot("trace_scan.svg", scan.points, scan.traces, o["param"], "tr T(omega; 0)", hlines=(-2.0, 2.0))

    def _run_bands(self):
        o = self.options
        band_list = spectral_class.bands(self.params, o["lambda_min"], o["lambda_max"], o["scan_step"],
                                         o["edge_tol"], self.config.tol)
        self._write("bands.csv", ["lower", "upper"], band_list.intervals, {"resolution": band_list.resolution})
        if self.config.plot:
            grid = np.linspace(o["lambda_min"], o["lambda_max"], 401)
            traces = [float(np.real(slspectra.monodromy(self.params, lam, Frame.PDPRIME, self.config.tol).trace))
                      for lam in grid]
            self._plot("bands.svg", grid, traces, "lambda", "tr T(omega; lambda)", hlines=(-2.0, 2.0))

    def _run_turan(self):
        o = self.options
        seq = asymptotics.turan_seq(self.params, self._eta(o["eta"]), o["t"], o["z"], o["n_max"], self.config.tol,
                                    check_case=o["check_case"])
        increments = seq.cauchy_increments()
        rows = [[n, v, inc] for n, (v, inc) in enumerate(zip(seq.values.tolist(), increments.tolist()))]
        self._write("turan.csv", ["n", "turan", "cauchy_increment"], rows,
                    {"tail": seq.tail, "last_increment": seq.last_increment})
        self._plot("turan.svg", np.arange(len(seq.values)), seq.values, "n", "Turan determinant")

    def _run_phi(self):
        o = self.options
        report = asymptotics.phi_estimate(self.params, self._eta(o["eta"]), o["t"], o["z"], o["n_max"],
                                          self.config.tol, o["floor"], self.config.delta)
        self.M = report.M
        ns = list(range(report.M, report.n_max + 1))
        rows = [[n, phi.real, phi.imag, theta, res] for n, phi, theta, res
                in zip(ns, report.phi_seq.tolist(), report.thetas.tolist(), report.residuals.tolist())]
        if report.possibly_vanishing:
            self.logger.log("WARNING", f"|phi| = {abs(report.phi):.3g} is below the floor: possibly vanishing")
        self._write("phi.csv", ["n", "phi_re", "phi_im", "theta", "residual"], rows,
                    {"phi_re": report.phi.real, "phi_im": report.phi.imag, "amplitude": report.amplitude,
                     "residual": report.residual, "relative_residual": report.relative_residual,
                     "possibly_vanishing": report.possibly_vanishing})
        self._plot("phi.svg", ns, report.residuals, "n", "E_n")

    def _run_density(self):
        o = self.options
        schedule = self._schedule(o["periods"], o["offset"])
        eta = tuple(self._eta(o["eta"]).as_tuple())
        lambdas = o["lambdas"]
        args = (self.params.name, _free_params(self.params), eta)
        if self.config.jobs > 1 and len(lambdas) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                reports = list(pool.map(_density_task, *zip(*[(*args, lam, schedule, self.config.tol) for lam in lambdas])))
        else:
            reports = [_density_task(*args, lam, schedule, self.config.tol) for lam in lambdas]
        rows = [[r.lam, s.L, s.K, s.rho, s.ratio, r.g, r.g_err, r.dos_density, r.mu_prime]
                for r in reports for s in r.samples]
        self._write("density.csv", ["lambda", "L", "K_L", "rho_L", "ratio", "g", "g_err", "dos", "mu_prime"], rows)
        if len(reports) > 1:
            self._plot("density.svg", [r.lam for r in reports], [r.mu_prime for r in reports], "lambda", "mu'")
        else:
            self._plot("density.svg", [s.L for s in reports[0].samples], [s.ratio for s in reports[0].samples],
                       "L", "K_L / rho_L")

    def _run_dos(self):
        o = self.options
        table = density.dos_convergence(self.params, self._eta(o["eta"]), tuple(o["window"]),
                                        self._schedule(o["periods"], o["offset"]), self.config.tol,
                                        o["count_method"], o["step"])
        rows = [[r.L, r.count, r.rho, r.normalized, table.target] for r in table.rows]
        self._write("dos.csv", ["L", "count", "rho_L", "normalized", "target"], rows, {"deviation": table.deviation})
        self._plot("dos.svg", [r.L for r in table.rows], [r.normalized for r in table.rows], "L", "count / rho_L",
                   hlines=(table.target,))

    def _run_eigcount(self):
        o = self.options
        eta, window, L = self._eta(o["eta"]), tuple(o["window"]), o["L"]
        if o["count_method"] == "scan":
            eigs = density.eigenvalues(self.params, eta, L, window, o["step"], self.config.tol)
            count = len(eigs)
            self._write("eigenvalues.csv", ["index", "lambda"], [[i, lam] for i, lam in enumerate(eigs)])
        else:
            count = density.count_eigenvalues(self.params, eta, L, window, tol=self.config.tol, method="prufer")
        rho = carleman_rho(self.params, L, self.config.tol)
        self._write("eigcount.csv", ["L", "count", "rho_L", "normalized"], [[L, count, rho, count / rho]])

    def _run_cauchy(self):
        o = self.options
        z = complex(o["z_re"], o["z_im"])
        eta = self._eta(o["eta"])
        limit = None
        if self.params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
            try:
                limit = density.cauchy_limit(self.params, self.config.tol)
            except NotInBandError as e:
                self.logger.log("WARNING", f"no limit constant: {e}")
        rows = []
        for L in self._schedule(o["periods"], o["offset"]):
            value = density.cauchy_transform(self.params, eta, L, z, self.config.tol)
            rho = carleman_rho(self.params, L, self.config.tol)
            rows.append([L, z.real, z.imag, value.real, value.imag, rho, value.real / rho, value.imag / rho,
                         None if limit is None else limit.real, None if limit is None else limit.imag])
        self._write("cauchy.csv", ["L", "z_re", "z_im", "value_re", "value_im", "rho_L", "scaled_re", "scaled_im",
                                   "limit_re", "limit_im"], rows)
        self._plot("cauchy.svg", [r[0] for r in rows], [r[7] for r in rows], "L", "Im F_L(z) / rho_L",
                   hlines=() if limit is None else (limit.imag,))

    def _run_example1_check(self):
        o = self.options
        schedule = self._schedule(o["periods"])
        rows = []
        for lam in o["lambdas"]:
            for pair in o["etas"]:
                eta = self._eta(pair)
                mu = density.spectral_density(self.params, eta, lam, schedule, self.config.tol).mu_prime
                for t in o["ts"]:
                    row = density.example1_identity(self.params, eta, lam, t, schedule, self.config.tol, mu_prime=mu)
                    rows.append([lam, t, eta.eta1, eta.eta2, row.det, row.mu_prime, row.lhs, row.rhs])
        self._write("example1.csv", ["lambda", "t", "eta1", "eta2", "det", "mu_prime", "lhs", "rhs"], rows)
        self._plot("example1.svg", range(len(rows)), [r[6] for r in rows], "sample", "det * mu'")

    def _run_minimal(self):
        o = self.options
        result = asymptotics.minimal_solution(self.params, complex(o["z_re"], o["z_im"]), o["n_max"],
                                              self.config.tol, o["t"])
        trace = result.trace
        rows = [[n, t, v[0].real, v[0].imag, v[1].real, v[1].imag, ls]
                for n, (t, v, ls) in enumerate(zip(trace.grid.tolist(), trace.values, trace.log_scales.tolist()))]
        self._write("minimal.csv", ["n", "t", "u_re", "u_im", "deriv_re", "deriv_im", "log_scale"], rows,
                    {"decay_rate": result.decay_rate, "empirical_rate": result.empirical_rate, "buffer": result.buffer})
        with np.errstate(divide="ignore"):
            log_u = np.log(np.abs(trace.values[:, 0])) + trace.log_scales
        self._plot("minimal.svg", np.arange(len(rows)), log_u, "n", "log |u_n|")

    def _record_error(self, error: Exception, exit_code: int):
        record = {"type": type(error).__name__, "message": str(error), "line": getattr(error, "line", None),
                  "exit_code": exit_code, "command": self.config.command}
        Utils.save_json(record, join(self.run_dir, "error.json"), delete_prev_file=True)

    def run(self) -> int:
        """Run the configured command; returns the process exit code."""
        self.logger.log("INFO", f"command {self.config.command} on {self.params.name} {Utils.dict_to_str(self.params.family_params)}")
        handler = getattr(self, f"_run_{section_name(self.config.command)}")
        try:
            handler()
        except ConfigError as e:
            self.logger.log("ERROR", str(e))
            self._record_error(e, EXIT_CONFIG)
            return EXIT_CONFIG
        except SLSpectraError as e:
            self.logger.log("ERROR", f"{type(e).__name__}: {e}")
            self._record_error(e, EXIT_NUMERIC)
            return EXIT_NUMERIC
        except Exception as e:
            logger.exception("unexpected failure in %s", self.config.command)
            self._record_error(e, EXIT_NUMERIC)
            return EXIT_NUMERIC
        self.logger.log("INFO", f"done: artifacts in {self.run_dir}")
        return EXIT_OK


def run(config: RunConfig) -> int:
    return SpectraRunner(config).run()


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv(dotenv_path=".env")
    parser = argparse.ArgumentParser(description="Spectral analysis of periodically modulated Sturm-Liouville operators.")
    parser.add_argument("--config", default="./config.yml", help="YAML run config")
    parser.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    parser.add_argument("--plot", action="store_true", default=None, help="also write an SVG of the primary series")
    args = parser.parse_args(argv)

    logging.basicConfig(level=os.getenv("SLSPECTRA_LOG_LEVEL", "INFO"), format="%(message)s", datefmt="[%X]",
                        handlers=[RichHandler(rich_tracebacks=True, show_path=False)], force=True)
    try:
        config = parse_config(Utils.read_file(args.config), args.out, args.jobs, args.plot)
    except (OSError, ConfigError) as e:
        error = e if isinstance(e, ConfigError) else ConfigError(f"cannot read {args.config}: {e}")
        logger.error("%s: %s", args.config, error)
        out_dir = args.out or os.getenv("SLSPECTRA_OUT_DIR", "Results")
        Utils.save_json({"type": type(error).__name__, "message": str(error), "line": error.line,
                         "exit_code": EXIT_CONFIG, "command": None}, join(out_dir, "error.json"), delete_prev_file=True)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
