"""Command-line front end.

Every subcommand writes CSV: a ``# key=value ...`` line with the resolved
parameters, a header line and the data, numbers formatted with 12
significant digits.  Passing such a CSV back through ``--config`` repeats
the run.  Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .angular import HalfInt, TransitionSpec
from .errors import DomainError, IntegrationError

__all__ = ["RunConfig", "UsageError", "parse_config", "run", "main", "COMMANDS"]

COMMANDS = ("dims", "spectrum", "dynamics", "swap", "emit", "selfcheck")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class UsageError(Exception):
    """Invalid command line or configuration; carries the offending key."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


# parameter table ----------------------------------------------------------------


def _half(text) -> HalfInt:
    return HalfInt.parse(text)


def _float(text) -> float:
    return float(text)


def _int(text) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _floats(text) -> tuple[float, ...]:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _complexes(text) -> tuple[complex, ...]:
    return tuple(complex(x.strip().replace(" ", "")) for x in str(text).split(",") if x.strip())


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"{text!r} is not one of {', '.join(options)}")
        return text

    return parse


@dataclass(frozen=True)
class _Param:
    name: str
    parse: Callable
    help: str
    default: object = None
    required: bool = False


_TRANSITION = [
    _Param("j0", _half, "ground-level angular momentum (integer or half-integer, e.g. 3/2 or 1.5)", required=True),
    _Param("j1", _half, "excited-level angular momentum", required=True),
]
_COUPLING = [
    _Param("delta", _float, "detuning in units of theta", 0.0),
    _Param("theta", _float, "coupling constant; all rates and times use its units", 1.0),
]
_GRID = [
    _Param("t_start", _float, "first time point", 0.0),
    _Param("t_end", _float, "last time point", 50.0),
    _Param("t_step", _float, "time step", 0.02),
]

PARAMS: dict[str, list[_Param]] = {
    "dims": [
        _Param("j", _half, "angular momentum of the atomic level", required=True),
        _Param("n", _int, "photon number", required=True),
    ],
    "spectrum": _TRANSITION
    + _COUPLING
    + [
        _Param("n", _int, "excitation number", required=True),
        _Param("l", _half, "projection l; all blocks of the manifold when omitted"),
    ],
    "dynamics": _TRANSITION
    + _COUPLING
    + [
        _Param("nc", _float, "mean thermal photon number", required=True),
        _Param("eps", _float, "thermal tail truncation bound", 1e-10),
        _Param("method", _choice("closed", "evolve"), "closed: Rabi sum; evolve: block propagation", "closed"),
    ]
    + _GRID,
    "swap": _TRANSITION
    + _COUPLING
    + [
        _Param("m", _half, "initial ground projection (pure state)"),
        _Param("populations", _floats, "comma-separated ground populations, m = -J0..J0"),
        _Param("method", _choice("closed", "evolve"), "closed: single-photon formula; evolve: block propagation", "closed"),
    ]
    + _GRID,
    "emit": _TRANSITION
    + _COUPLING
    + [
        _Param("gamma_c", _float, "cavity decay rate", 0.0),
        _Param("gamma_a", _float, "spontaneous emission rate", 0.0),
        _Param("m", _half, "initial excited projection (pure state)"),
        _Param("excited", _complexes, "comma-separated excited amplitudes, m = -J1..J1 (e.g. 1,0,1j)"),
        _Param("method", _choice("closed", "lindblad", "both"), "which emission model to run", "closed"),
    ]
    + _GRID,
    "selfcheck": [
        _Param("n_max", _int, "largest excitation number for the closed-form comparison", 12),
        _Param("j_max", _half, "largest angular momentum for 3j, sum-rule and single-photon checks", 4),
    ],
}


@dataclass
class RunConfig:
    """Validated command and parameters."""

    command: str
    params: dict[str, object]
    output_path: str | None = None
    transition: TransitionSpec | None = field(default=None)

    def comment_line(self) -> str:
        items = [f"command={self.command}"]
        for p in PARAMS[self.command]:
            value = self.params.get(p.name)
            if value is None:
                continue
            items.append(f"{p.name}={_format_param(value)}")
        return "# " + " ".join(items)


def _format_param(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_param(v) for v in value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    return str(value)


# parsing ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jcdegen", description="Degenerate-level Jaynes-Cummings simulations.", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    helps = {
        "dims": "dimension of every subspace V(a, n, l) of one level",
        "spectrum": "coupled pairs and Rabi frequencies of the blocks of one manifold",
        "dynamics": "excited population for a thermal field",
        "swap": "sigma+ to sigma- photon conversion probability",
        "emit": "single-photon emission with cavity and atomic decay",
        "selfcheck": "run the oracle comparisons and report pass/fail counts",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name], allow_abbrev=False)
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("-o", "--output", help="write CSV here instead of standard output")
        for param in PARAMS[name]:
            flag = "--" + param.name.replace("_", "-")
            p.add_argument(flag, dest=param.name, default=None, help=param.help)
            if param.name == "nc":
                p.add_argument("--n-c", dest="nc", default=None, help=argparse.SUPPRESS)
        if name == "emit":
            p.add_argument("--both", dest="method", action="store_const", const="both", help="same as --method both")
    return parser


def read_config_file(path: str) -> dict[str, str]:
    """Read ``key=value`` settings.

    A file whose first line is a ``# command=...`` parameter line (as written
    at the top of every output CSV) contributes that line only.  Otherwise
    every non-empty line outside ``#`` comments must hold ``key=value`` items.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}", "config") from None
    if lines and lines[0].startswith("#") and "command=" in lines[0]:
        lines = [lines[0][1:]]
    else:
        lines = [line.split("#", 1)[0] for line in lines]
    out: dict[str, str] = {}
    for line in lines:
        for token in line.split():
            if "=" not in token:
                raise UsageError(f"config entry {token!r} is not key=value", "config")
            key, value = token.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse flags (and an optional config file) into a validated :class:`RunConfig`."""
    args = _build_parser().parse_args(list(argv) if argv is not None else None)
    command = args.command
    specs = {p.name: p for p in PARAMS[command]}
    raw: dict[str, object] = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key == "command":
                if value != command:
                    raise UsageError(f"config file is for command {value!r}, not {command!r}", "command")
                continue
            if key == "n_c":
                key = "nc"
            if key not in specs:
                raise UsageError(f"unknown config key {key!r} for command {command!r}", key)
            raw[key] = value
    for name in specs:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value

    params: dict[str, object] = {}
    for name, spec in specs.items():
        if name in raw:
            try:
                params[name] = spec.parse(raw[name])
            except (ValueError, TypeError, DomainError) as exc:
                raise UsageError(f"invalid value for {name}: {exc}", name) from None
        elif spec.required:
            raise UsageError(f"missing required parameter {name}", name)
        else:
            params[name] = None if spec.default is None else spec.parse(spec.default)
    cfg = RunConfig(command, params, args.output)
    _validate(cfg)
    return cfg


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise UsageError(f"{key}: {message}", key)


def _validate(cfg: RunConfig) -> None:
    p = cfg.params
    if "j0" in p:
        try:
            cfg.transition = TransitionSpec(p["j0"], p["j1"])
        except DomainError as exc:
            raise UsageError(f"j0/j1: {exc}", "j1") from None
    if "theta" in p:
        _require(math.isfinite(p["theta"]) and p["theta"] > 0, "theta", "must be a positive number")
    if "delta" in p:
        _require(math.isfinite(p["delta"]), "delta", "must be finite")
    if "t_step" in p:
        _require(p["t_step"] > 0, "t_step", "must be > 0")
        _require(p["t_end"] >= p["t_start"], "t_end", "must be >= t_start")
        _require(p["t_start"] >= 0, "t_start", "must be >= 0")
        count = (p["t_end"] - p["t_start"]) / p["t_step"]
        _require(count <= 5e6, "t_step", "grid has more than 5e6 points")
    cmd = cfg.command
    if cmd == "dims":
        _require(p["j"].twice >= 0, "j", "must be >= 0")
        _require(p["n"] >= 0, "n", "must be >= 0")
    elif cmd == "spectrum":
        _require(p["n"] >= 0, "n", "must be >= 0")
    elif cmd == "dynamics":
        _require(p["nc"] > 0, "nc", "must be > 0")
        _require(0 < p["eps"] < 1e-3, "eps", "must lie in (0, 1e-3)")
    elif cmd == "swap":
        t = cfg.transition
        _require((p["m"] is None) != (p["populations"] is None), "m", "give exactly one of --m or --populations")
        if p["m"] is not None:
            m = p["m"].twice
            _require(abs(m) <= t.j0_2 and (t.j0_2 - m) % 2 == 0, "m", f"not a projection of J0={HalfInt(t.j0_2)}")
        else:
            pops = p["populations"]
            _require(len(pops) == t.j0_2 + 1, "populations", f"needs {t.j0_2 + 1} entries")
            _require(min(pops) >= 0 and abs(sum(pops) - 1) <= 1e-12, "populations", "must be nonnegative and sum to 1")
    elif cmd == "emit":
        t = cfg.transition
        _require(p["gamma_c"] >= 0, "gamma_c", "must be >= 0")
        _require(p["gamma_a"] >= 0, "gamma_a", "must be >= 0")
        _require((p["m"] is None) != (p["excited"] is None), "m", "give exactly one of --m or --excited")
        if p["m"] is not None:
            m = p["m"].twice
            _require(abs(m) <= t.j1_2 and (t.j1_2 - m) % 2 == 0, "m", f"not a projection of J1={HalfInt(t.j1_2)}")
        else:
            amps = p["excited"]
            _require(len(amps) == t.j1_2 + 1, "excited", f"needs {t.j1_2 + 1} amplitudes")
            _require(any(abs(a) > 0 for a in amps), "excited", "amplitudes are all zero")
    elif cmd == "selfcheck":
        _require(1 <= p["n_max"] <= 40, "n_max", "must lie in 1..40")
        _require(0 <= p["j_max"].twice <= 20, "j_max", "must lie in 0..10")


# commands ---------------------------------------------------------------------


def _grid(p) -> np.ndarray:
    count = int(round((p["t_end"] - p["t_start"]) / p["t_step"]))
    return p["t_start"] + p["t_step"] * np.arange(count + 1)


def _cmd_dims(cfg: RunConfig):
    from .statespace import _level_dims2

    p = cfg.params
    ja_2 = p["j"].twice
    top = ja_2 + 2 * p["n"]
    rows = []
    for l_2 in range(-top, top + 1, 2):
        dim = _level_dims2(ja_2, p["n"], l_2)[1]
        parity = ((l_2 + ja_2 + 2 * p["n"]) // 2) % 2
        rows.append((str(HalfInt(l_2)), dim, parity))
    return ["l", "dim", "p"], rows


def _cmd_spectrum(cfg: RunConfig):
    from .spectral import block_eigensystem
    from .statespace import enumerate_block_keys

    p, t = cfg.params, cfg.transition
    keys = [k.l for k in enumerate_block_keys(t, p["n"])]
    if p["l"] is not None:
        if p["l"] not in keys:
            raise UsageError(f"l: no block with l={p['l']} at n={p['n']}", "l")
        keys = [p["l"]]
    rows = []
    for l in keys:
        es = block_eigensystem(t, p["n"], l)
        common = (p["n"], str(l), es.dim0, es.dim1, es.d0.shape[1], es.d1.shape[1])
        if not es.n_coupled:
            rows.append(common + (-1, 0.0, 0.0))
        for k, xi in enumerate(es.xi):
            omega = math.sqrt(p["delta"] ** 2 + (p["theta"] * xi) ** 2)
            rows.append(common + (k, float(xi), omega))
    return ["n", "l", "dim0", "dim1", "dark0", "dark1", "k", "xi", "omega"], rows


def _cmd_dynamics(cfg: RunConfig):
    from . import scenarios

    p, t = cfg.params, cfg.transition
    times = _grid(p)
    tc = scenarios.ThermalConfig(t, p["delta"], p["theta"], p["nc"], times, p["eps"])
    if p["method"] == "closed":
        n1 = scenarios.thermal_population(tc)
    else:
        n1 = scenarios.thermal_population_evolved(tc)
    header = ["t", "n1"]
    columns = [times, n1]
    if t.j1_2 == t.j0_2 + 2:
        header.append("n1_stretched")
        columns.append(scenarios.stretched_population(tc))
    return header, list(zip(*columns))


def _cmd_swap(cfg: RunConfig):
    from . import scenarios

    p, t = cfg.params, cfg.transition
    times = _grid(p)
    kwargs = dict(delta=p["delta"], theta=p["theta"], t_grid=times)
    if p["m"] is not None:
        sc = scenarios.SwapConfig.pure(t, p["m"], **kwargs)
    else:
        sc = scenarios.SwapConfig(t, ground_populations=p["populations"], **kwargs)
    fn = scenarios.polarization_swap if p["method"] == "closed" else scenarios.polarization_swap_evolved
    return ["t", "w"], list(zip(times, fn(sc)))


def _photon_columns(w: np.ndarray) -> list[np.ndarray]:
    prob = np.real(w[:, 0, 0] + w[:, 1, 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(prob > 0, 1.0 / np.where(prob > 0, prob, 1.0), np.nan)
    return [
        prob,
        np.real(w[:, 0, 0]) * inv,
        np.real(w[:, 1, 1]) * inv,
        np.real(w[:, 0, 1]) * inv,
        np.imag(w[:, 0, 1]) * inv,
    ]


def _cmd_emit(cfg: RunConfig):
    from . import relaxation

    p, t = cfg.params, cfg.transition
    times = _grid(p)
    if p["m"] is not None:
        amps = np.zeros(t.j1_2 + 1, dtype=complex)
        amps[(p["m"].twice + t.j1_2) // 2] = 1.0
    else:
        amps = np.asarray(p["excited"], dtype=complex)
    ec = relaxation.EmissionConfig.pure(
        t, amps, delta=p["delta"], theta=p["theta"], gamma_c=p["gamma_c"], gamma_a=p["gamma_a"]
    )
    methods = ["closed", "lindblad"] if p["method"] == "both" else [p["method"]]
    names = ["w", "sigma_pp", "sigma_mm", "re_sigma_pm", "im_sigma_pm"]
    header, columns = ["t"], [times]
    for method in methods:
        if method == "closed":
            w = relaxation.emission_closed_form_series(ec, times)
        else:
            prefix = times[0] > 0
            grid = np.concatenate([[0.0], times]) if prefix else times
            w = relaxation.emission_lindblad(ec, grid).w[1 if prefix else 0 :]
        suffix = f"_{method}" if len(methods) > 1 else ""
        header += [n + suffix for n in names]
        columns += _photon_columns(w)
    return header, list(zip(*columns))


def _cmd_selfcheck(cfg: RunConfig):
    from .selfcheck import run_suites

    results = run_suites(n_max=cfg.params["n_max"], j_max_2=cfg.params["j_max"].twice)
    rows = [(r.suite, r.checks, r.failures, r.max_error) for r in results]
    return ["suite", "checks", "failures", "max_error"], rows, any(r.failures for r in results)


_COMMAND_FNS = {
    "dims": _cmd_dims,
    "spectrum": _cmd_spectrum,
    "dynamics": _cmd_dynamics,
    "swap": _cmd_swap,
    "emit": _cmd_emit,
    "selfcheck": _cmd_selfcheck,
}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def render_csv(cfg: RunConfig, header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(cfg.comment_line() + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute ``cfg``; returns the process exit status."""
    stdout = stdout or sys.stdout
    result = _COMMAND_FNS[cfg.command](cfg)
    header, rows = result[0], result[1]
    failed = len(result) > 2 and result[2]
    text = render_csv(cfg, header, rows)
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except BaseException:
            if os.path.exists(cfg.output_path):
                os.remove(cfg.output_path)
            raise
    else:
        stdout.write(text)
    return EXIT_NUMERICAL if failed else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"jcdegen: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"jcdegen: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, DomainError, FloatingPointError, np.linalg.LinAlgError) as exc:
        where = f" at t={exc.t:g}" if isinstance(exc, IntegrationError) and exc.t is not None else ""
        print(f"jcdegen: numerical failure in {cfg.command}{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
