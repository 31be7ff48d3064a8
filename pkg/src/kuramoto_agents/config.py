"""INI-style run configuration and the embedded presets.

Grammar (``#`` or ``;`` start comments, every key optional)::

    [topology]      kind = all-to-all | scale-free | file
                    size = <n for all-to-all, iterations for scale-free>
                    path = <edge-list file, relative to the config file>
    [model]         lambda, mu
    [simulate]      epsilon, sigma, seed
    [sweep]         epsilon, sigma, replicates, seed, transient_fraction
    [integration]   method = rk4 | euler, dt, t_end, record_stride
    [output]        trajectory, sweep   (CSV paths)

List values are comma separated; ``linspace(a, b, n)`` is accepted for the
sweep grids. Missing keys take the defaults of :class:`RunConfig`, which are
the all-to-all experiment.
"""

from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .experiments import ExperimentSpec, TopologySpec
from .integrate import IntegrationConfig
from .rng import MASK64


@dataclass(frozen=True)
class RunConfig:
    topology: TopologySpec = field(default_factory=TopologySpec)
    lam: float = 1.0
    mu: float = 0.0
    simulate_epsilon: float = 5.0
    simulate_sigma: float = 0.5
    simulate_seed: int = 1
    epsilon_grid: tuple[float, ...] = tuple(np.linspace(0.0, 5.0, 26).tolist())
    sigma_list: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0)
    replicates: int = 10
    base_seed: int = 1
    transient_fraction: float = 0.5
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    trajectory_out: str = "trajectory.csv"
    sweep_out: str = "sweep.csv"

    def experiment_spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            topology=self.topology,
            lam=self.lam,
            epsilon_grid=self.epsilon_grid,
            sigma_list=self.sigma_list,
            mu=self.mu,
            replicates=self.replicates,
            base_seed=self.base_seed,
            integration=self.integration,
            transient_fraction=self.transient_fraction,
        )

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, simulate_seed=seed, base_seed=seed)

    def to_ini(self) -> str:
        """Effective configuration with every value explicit; parses back to an equal config."""
        t = self.topology
        lines = ["[topology]", f"kind = {t.kind}"]
        if t.kind == "file":
            lines.append(f"path = {t.path}")
        else:
            lines.append(f"size = {t.size}")
        ig = self.integration
        lines += [
            "",
            "[model]",
            f"lambda = {self.lam!r}",
            f"mu = {self.mu!r}",
            "",
            "[simulate]",
            f"epsilon = {self.simulate_epsilon!r}",
            f"sigma = {self.simulate_sigma!r}",
            f"seed = {self.simulate_seed}",
            "",
            "[sweep]",
            "epsilon = " + ", ".join(repr(e) for e in self.epsilon_grid),
            "sigma = " + ", ".join(repr(s) for s in self.sigma_list),
            f"replicates = {self.replicates}",
            f"seed = {self.base_seed}",
            f"transient_fraction = {self.transient_fraction!r}",
            "",
            "[integration]",
            f"method = {ig.method}",
            f"dt = {ig.dt!r}",
            f"t_end = {ig.t_end!r}",
            f"record_stride = {ig.record_stride}",
            "",
            "[output]",
            f"trajectory = {self.trajectory_out}",
            f"sweep = {self.sweep_out}",
        ]
        return "\n".join(lines) + "\n"


_SCHEMA = {
    "topology": {"kind", "size", "path"},
    "model": {"lambda", "mu"},
    "simulate": {"epsilon", "sigma", "seed"},
    "sweep": {"epsilon", "sigma", "replicates", "seed", "transient_fraction"},
    "integration": {"method", "dt", "t_end", "record_stride"},
    "output": {"trajectory", "sweep"},
}

_LINSPACE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    where = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip().lower()
        elif section and "=" in s and not s.startswith(("#", ";")):
            where[(section, s.split("=", 1)[0].strip().lower())] = lineno
    return where


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, lines: dict, source: str):
        self.p = parser
        self.lines = lines
        self.source = source

    def has(self, section, key):
        return self.p.has_option(section, key)

    def raw(self, section, key) -> str:
        return self.p.get(section, key).strip()

    def fail(self, section, key, message) -> ConfigError:
        line = self.lines.get((section, key))
        loc = f"{self.source}:{line}: " if line else f"{self.source}: "
        return ConfigError(loc + message, field=f"{section}.{key}")

    def get(self, section, key, conv, default):
        if not self.has(section, key):
            return default
        text = self.raw(section, key)
        try:
            return conv(text)
        except (ValueError, TypeError) as exc:
            raise self.fail(section, key, f"invalid value {text!r} ({exc})") from None


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= MASK64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _float_list(text: str) -> tuple[float, ...]:
    m = _LINSPACE.match(text)
    if m:
        a, b, n = _float(m.group(1)), _float(m.group(2)), int(m.group(3))
        if n < 1:
            raise ValueError("linspace needs at least one point")
        return tuple(np.linspace(a, b, n).tolist())
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(s) for s in items)


def parse_config(text: str, source: str = "<config>", base_dir: str | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from None
    lines = _key_lines(text)
    rd = _Reader(parser, lines, source)

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]", field=section)
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise rd.fail(section, key, "unknown key")

    d = RunConfig()
    size = rd.get("topology", "size", int, None)
    path = rd.get("topology", "path", str, None)
    kind = rd.get("topology", "kind", str, "file" if path and size is None else d.topology.kind)
    if kind == "file" and path and base_dir and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    if kind != "file" and size is None:
        size = 10 if kind == "all-to-all" else 4
    try:
        topology = TopologySpec(kind, None if kind == "file" else size, path)
    except ValueError as exc:
        raise rd.fail("topology", "kind", str(exc)) from None

    try:
        integration = IntegrationConfig(
            dt=rd.get("integration", "dt", _float, d.integration.dt),
            t_end=rd.get("integration", "t_end", _float, d.integration.t_end),
            record_stride=rd.get("integration", "record_stride", int, d.integration.record_stride),
            method=rd.get("integration", "method", str, d.integration.method),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: [integration] {exc}", field="integration") from None

    cfg = RunConfig(
        topology=topology,
        lam=rd.get("model", "lambda", _float, d.lam),
        mu=rd.get("model", "mu", _float, d.mu),
        simulate_epsilon=rd.get("simulate", "epsilon", _float, d.simulate_epsilon),
        simulate_sigma=rd.get("simulate", "sigma", _float, d.simulate_sigma),
        simulate_seed=rd.get("simulate", "seed", _u64, d.simulate_seed),
        epsilon_grid=rd.get("sweep", "epsilon", _float_list, d.epsilon_grid),
        sigma_list=rd.get("sweep", "sigma", _float_list, d.sigma_list),
        replicates=rd.get("sweep", "replicates", int, d.replicates),
        base_seed=rd.get("sweep", "seed", _u64, d.base_seed),
        transient_fraction=rd.get("sweep", "transient_fraction", _float, d.transient_fraction),
        integration=integration,
        trajectory_out=rd.get("output", "trajectory", str, d.trajectory_out),
        sweep_out=rd.get("output", "sweep", str, d.sweep_out),
    )

    checks = [
        ("simulate", "epsilon", cfg.simulate_epsilon >= 0, "must be >= 0"),
        ("simulate", "sigma", cfg.simulate_sigma >= 0, "must be >= 0"),
        ("sweep", "epsilon", all(e >= 0 for e in cfg.epsilon_grid), "values must be >= 0"),
        ("sweep", "sigma", all(s >= 0 for s in cfg.sigma_list), "values must be >= 0"),
        ("sweep", "replicates", cfg.replicates >= 1, "must be >= 1"),
        ("sweep", "transient_fraction", 0 <= cfg.transient_fraction < 1, "must lie in [0, 1)"),
    ]
    for section, key, ok, msg in checks:
        if not ok:
            raise rd.fail(section, key, msg)
    return cfg


def load_config(path: str | os.PathLike) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))


PRESETS: dict[str, tuple[str, str]] = {
    "fig3": (
        "coupling sweep on the 10-agent all-to-all network",
        """
[topology]
kind = all-to-all
size = 10
[model]
lambda = 1.0
mu = 0.0
[simulate]
epsilon = 5.0
sigma = 0.5
seed = 1
[sweep]
epsilon = linspace(0, 5, 26)
sigma = 0.1, 0.5, 1.0, 2.0
replicates = 10
seed = 1
transient_fraction = 0.5
[integration]
method = rk4
dt = 0.01
t_end = 100
record_stride = 10
[output]
trajectory = all2all_trajectory.csv
sweep = fig3_sweep.csv
""",
    ),
    "fig6": (
        "coupling sweep on the 81-agent deterministic scale-free network",
        """
[topology]
kind = scale-free
size = 4
[model]
lambda = 1.0
mu = 0.0
[simulate]
epsilon = 30.0
sigma = 0.05
seed = 1
[sweep]
epsilon = linspace(0, 30, 31)
sigma = 0.05, 0.10, 0.15, 0.20
replicates = 10
seed = 1
transient_fraction = 0.5
[integration]
method = rk4
dt = 0.01
t_end = 100
record_stride = 10
[output]
trajectory = scalefree_trajectory.csv
sweep = fig6_sweep.csv
""",
    ),
}
PRESETS["all2all_paper"] = (
    "single run: all-to-all N=10, lambda=1, epsilon=5, sigma=0.5",
    PRESETS["fig3"][1],
)
PRESETS["scalefree_paper"] = (
    "single run: scale-free N=81, lambda=1, epsilon=30, sigma=0.05",
    PRESETS["fig6"][1],
)


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return parse_config(PRESETS[name][1], source=f"<preset {name}>")
