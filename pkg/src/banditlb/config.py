"""Experiment configuration: a flat key-value text format with section
headers (INI dialect), parseable by any language's stock config reader.

Sections and keys::

    [experiment]
    command = bounds | simulate | verify | figure1
    seed = 1
    out = results

    [problem]
    model = bernoulli | gaussian | poisson | gamma | binomial | dirac | bounded
    arms =
        bernoulli 0.05
        bernoulli 0.04
    # or instead of model/arms:
    preset = figure1

    [strategy]
    id = thompson_bernoulli
    # optional numeric parameters, e.g. mu_star = 0.05, support = 1.0, arm = 0

    [run]
    horizon = 10000
    runs = 500
    checkpoints = log 50 | linear 20 | list 1,10,100

    [bounds]
    ids = asymptotic envelope
    eps = 0.05
    delta = 0.01
    c_psi = 16
    omega = 0.5

Arm grammar: ``bernoulli p``, ``gaussian mean variance``, ``poisson mean``,
``gamma shape mean``, ``binomial n mean``, ``dirac point``,
``finite ceiling x1:w1 x2:w2 ...``.

parse and serialize round-trip: parse(serialize(parse(text))) equals
parse(text).
"""

import configparser
import io
from dataclasses import dataclass, field

from .models import (
    BanditProblem,
    Bernoulli,
    Binomial,
    Dirac,
    Finite,
    GammaKnownShape,
    Gaussian,
    Poisson,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "figure1_problem",
    "figure1_config",
    "FIGURE1_MEANS",
]


class ConfigError(ValueError):
    """The configuration text is malformed or references unknown ids."""


COMMANDS = ("bounds", "simulate", "verify", "figure1")

#: the flagship preset: coin-flip arms at these means, posterior sampling,
#: 500 runs to a horizon of 10^4
FIGURE1_MEANS = (0.05, 0.04, 0.02, 0.015, 0.01, 0.005)


def figure1_problem() -> BanditProblem:
    return BanditProblem(tuple(Bernoulli(p) for p in FIGURE1_MEANS), "bernoulli")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int = 1
    out_dir: str = "results"
    problem: BanditProblem | None = None
    strategy_id: str | None = None
    strategy_params: dict = field(default_factory=dict)
    horizon: int = 10_000
    runs: int = 100
    checkpoints: tuple = ("log", 50)
    bounds: tuple = ("asymptotic",)
    eps: float | None = None
    delta: float | None = None
    c_psi: float = 16.0
    omega: float | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned value")


def _parse_arm(line: str):
    parts = line.split()
    if not parts:
        raise ConfigError("empty arm line")
    fam, args = parts[0], parts[1:]
    try:
        if fam == "bernoulli":
            (p,) = args
            return Bernoulli(float(p))
        if fam == "gaussian":
            mu, var = args
            return Gaussian(float(mu), float(var))
        if fam == "poisson":
            (lam,) = args
            return Poisson(float(lam))
        if fam == "gamma":
            shape, mu = args
            return GammaKnownShape(float(shape), float(mu))
        if fam == "binomial":
            n, mu = args
            return Binomial(int(n), float(mu))
        if fam == "dirac":
            (x,) = args
            return Dirac(float(x))
        if fam == "finite":
            ceiling = float(args[0])
            pts = []
            wts = []
            for chunk in args[1:]:
                x, w = chunk.split(":")
                pts.append(float(x))
                wts.append(float(w))
            return Finite(tuple(pts), tuple(wts), ceiling)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad arm line {line!r}: {exc}") from exc
    raise ConfigError(f"unknown arm family {fam!r}")


def _format_arm(d) -> str:
    if d.family == "bernoulli":
        return f"bernoulli {d.p!r}"
    if d.family == "gaussian":
        return f"gaussian {d.mu!r} {d.variance!r}"
    if d.family == "poisson":
        return f"poisson {d.lam!r}"
    if d.family == "gamma":
        return f"gamma {d.shape!r} {d.mu!r}"
    if d.family == "binomial":
        return f"binomial {d.n} {d.mu!r}"
    if d.family == "dirac":
        return f"dirac {d.point!r}"
    if d.family == "finite":
        pairs = " ".join(f"{x!r}:{w!r}" for x, w in zip(d.points, d.weights))
        return f"finite {d.ceiling!r} {pairs}"
    raise ConfigError(f"unknown family {d.family!r}")


def _parse_checkpoints(text: str):
    parts = text.split(None, 1)
    if len(parts) != 2:
        raise ConfigError(f"bad checkpoints spec {text!r}")
    kind, rest = parts
    if kind in ("log", "linear"):
        try:
            n = int(rest)
        except ValueError as exc:
            raise ConfigError(f"bad checkpoint count {rest!r}") from exc
        if n < 1:
            raise ConfigError("checkpoint count must be >= 1")
        return (kind, n)
    if kind == "list":
        try:
            pts = tuple(int(x) for x in rest.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad checkpoint list {rest!r}") from exc
        if not pts:
            raise ConfigError("empty checkpoint list")
        return ("list", pts)
    raise ConfigError(f"unknown checkpoint grid kind {kind!r}")


def _format_checkpoints(spec) -> str:
    kind = spec[0]
    if kind in ("log", "linear"):
        return f"{kind} {spec[1]}"
    return "list " + ",".join(str(x) for x in spec[1])


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc

    if not cp.has_section("experiment") or not cp.has_option("experiment", "command"):
        raise ConfigError("missing [experiment] command")
    kwargs = {"command": cp.get("experiment", "command").strip()}
    if cp.has_option("experiment", "seed"):
        try:
            kwargs["seed"] = int(cp.get("experiment", "seed"))
        except ValueError as exc:
            raise ConfigError("seed must be an integer") from exc
    if cp.has_option("experiment", "out"):
        kwargs["out_dir"] = cp.get("experiment", "out").strip()

    if cp.has_section("problem"):
        if cp.has_option("problem", "preset"):
            preset = cp.get("problem", "preset").strip()
            if preset != "figure1":
                raise ConfigError(f"unknown problem preset {preset!r}")
            kwargs["problem"] = figure1_problem()
        else:
            if not cp.has_option("problem", "model") or not cp.has_option("problem", "arms"):
                raise ConfigError("[problem] needs model and arms (or preset)")
            model = cp.get("problem", "model").strip()
            lines = [ln.strip() for ln in cp.get("problem", "arms").splitlines() if ln.strip()]
            arms = tuple(_parse_arm(ln) for ln in lines)
            try:
                kwargs["problem"] = BanditProblem(arms, model)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    if cp.has_section("strategy"):
        if not cp.has_option("strategy", "id"):
            raise ConfigError("[strategy] needs an id")
        kwargs["strategy_id"] = cp.get("strategy", "id").strip()
        params = {}
        for key, val in cp.items("strategy"):
            if key == "id":
                continue
            try:
                params[key] = int(val) if key == "arm" else float(val)
            except ValueError as exc:
                raise ConfigError(f"bad strategy parameter {key}={val!r}") from exc
        kwargs["strategy_params"] = params

    if cp.has_section("run"):
        for key, cast, name in (("horizon", int, "horizon"), ("runs", int, "runs")):
            if cp.has_option("run", key):
                try:
                    kwargs[name] = cast(cp.get("run", key))
                except ValueError as exc:
                    raise ConfigError(f"bad {key}") from exc
        if cp.has_option("run", "checkpoints"):
            kwargs["checkpoints"] = _parse_checkpoints(cp.get("run", "checkpoints"))

    if cp.has_section("bounds"):
        if cp.has_option("bounds", "ids"):
            ids = tuple(cp.get("bounds", "ids").replace(",", " ").split())
            if not ids:
                raise ConfigError("empty bounds ids")
            kwargs["bounds"] = ids
        for key in ("eps", "delta", "omega"):
            if cp.has_option("bounds", key):
                raw = cp.get("bounds", key).strip()
                if raw:
                    try:
                        kwargs[key] = float(raw)
                    except ValueError as exc:
                        raise ConfigError(f"bad {key}={raw!r}") from exc
        if cp.has_option("bounds", "c_psi"):
            try:
                kwargs["c_psi"] = float(cp.get("bounds", "c_psi"))
            except ValueError as exc:
                raise ConfigError("bad c_psi") from exc

    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def serialize_config(cfg: ExperimentConfig) -> str:
    out = io.StringIO()
    out.write("[experiment]\n")
    out.write(f"command = {cfg.command}\n")
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"out = {cfg.out_dir}\n")
    if cfg.problem is not None:
        out.write("\n[problem]\n")
        out.write(f"model = {cfg.problem.model}\n")
        out.write("arms =\n")
        for d in cfg.problem.arms:
            out.write(f"    {_format_arm(d)}\n")
    if cfg.strategy_id is not None:
        out.write("\n[strategy]\n")
        out.write(f"id = {cfg.strategy_id}\n")
        for key in sorted(cfg.strategy_params):
            out.write(f"{key} = {cfg.strategy_params[key]!r}\n")
    out.write("\n[run]\n")
    out.write(f"horizon = {cfg.horizon}\n")
    out.write(f"runs = {cfg.runs}\n")
    out.write(f"checkpoints = {_format_checkpoints(cfg.checkpoints)}\n")
    out.write("\n[bounds]\n")
    out.write(f"ids = {' '.join(cfg.bounds)}\n")
    if cfg.eps is not None:
        out.write(f"eps = {cfg.eps!r}\n")
    if cfg.delta is not None:
        out.write(f"delta = {cfg.delta!r}\n")
    out.write(f"c_psi = {cfg.c_psi!r}\n")
    if cfg.omega is not None:
        out.write(f"omega = {cfg.omega!r}\n")
    return out.getvalue()


def figure1_config(seed: int = 1, out_dir: str = "results") -> ExperimentConfig:
    """The flagship one-command experiment: the preset problem under
    posterior sampling, 500 runs to horizon 10^4 on a log grid, with the
    asymptotic benchmark and the bound envelope alongside."""
    return ExperimentConfig(
        command="figure1",
        seed=seed,
        out_dir=out_dir,
        problem=figure1_problem(),
        strategy_id="thompson_bernoulli",
        strategy_params={},
        horizon=10_000,
        runs=500,
        checkpoints=("log", 50),
        bounds=("asymptotic", "envelope"),
    )
