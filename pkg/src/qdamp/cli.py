"""Command-line front end.

Every subcommand writes one CSV (standard output by default).  Parameters can
come from ``--config FILE`` (lines of ``key = value``, ``#`` comments) and
from flags; flags win.  Exit codes: 0 ok, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import bath_oracle, coupling, dynamics, field as kg, spectra, transitions
from .errors import NumericalError, QdampError


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


@dataclass(frozen=True)
class Param:
    name: str
    type: Callable[[str], Any]
    default: Any = None
    required: bool = False
    check: Optional[str] = None          # "pos", "nonneg" or None
    choices: Optional[tuple[str, ...]] = None
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_MASS = Param("m", float, 1.0, check="pos", help="oscillator mass")
_OMEGA = Param("omega", float, 1.0, check="pos", help="oscillator frequency")
_BETA = Param("beta", float, required=True, check="pos", help="Ohmic friction coefficient")
_CUTOFF = Param("cutoff", float, required=True, check="pos", help="hard frequency cutoff")
_TMAX = Param("tmax", float, required=True, check="nonneg", help="final time")
_DT = Param("dt", float, required=True, check="pos", help="time step")

COMMANDS: dict[str, tuple[str, list[Param]]] = {
    "kernel": ("tabulate the memory kernel gamma(t)", [_BETA, _CUTOFF, _TMAX, _DT]),
    "trajectory": ("mean path of the damped oscillator", [
        _MASS, _OMEGA,
        Param("beta", float, required=True, check="nonneg", help="Ohmic friction coefficient"),
        Param("q0", float, 1.0, help="initial position"),
        Param("p0", float, 0.0, help="initial momentum"),
        _TMAX, _DT,
        Param("method", str, "closed-form", choices=("closed-form", "volterra")),
        Param("cutoff", float, check="pos",
              help="finite cutoff for the volterra kernel (default: memoryless limit)"),
        Param("potential", str, "harmonic", choices=("harmonic", "free")),
    ]),
    "energies": ("asymptotic reservoir energy (n + 1/2) omega, quadrature vs closed form", [
        Param("n", _nonneg_int, required=True, help="oscillator level"),
        _OMEGA, _MASS, _BETA,
        Param("sweep", str, choices=("n", "omega", "m", "beta"),
              help="parameter to sweep over --values"),
        Param("values", _floats, help="comma-separated sweep values"),
    ]),
    "rates": ("first-order transition rates", [
        Param("n", _nonneg_int, required=True, help="oscillator level"),
        _OMEGA, _MASS, _BETA,
        Param("T", float, 0.0, check="nonneg", help="reservoir temperature (0: vacuum)"),
        Param("cutoff", float, check="pos", help="frequency cutoff (default 20 omega)"),
        Param("quanta", _floats, help="comma-separated frequencies of reservoir quanta"),
        Param("t", float, check="pos", help="elapsed time for the reservoir-quanta rates"),
    ]),
    "bath-sim": ("exact discretised-reservoir energy time series", [
        Param("N", int, required=True, check="pos", help="number of reservoir modes"),
        _CUTOFF, _MASS, _OMEGA, _BETA,
        Param("n", _nonneg_int, 0, help="initial oscillator level"),
        Param("init", str, "vacuum", choices=("vacuum", "thermal", "quanta"), help="initial reservoir state"),
        Param("T", float, 0.0, check="nonneg", help="reservoir temperature for init=thermal"),
        Param("quanta", _ints, (), help="comma-separated mode indices for init=quanta"),
        _TMAX, _DT,
        Param("grid", str, "uniform", choices=("uniform", "gauss-legendre")),
        Param("normal-order", _bool, True, help="normal-order oscillator and reservoir energies"),
    ]),
    "field": ("Klein-Gordon source profiles P(r), Q(r)", [
        _BETA, _CUTOFF,
        Param("rmax", float, required=True, check="pos", help="largest radius"),
        Param("dr", float, required=True, check="pos", help="radial step"),
    ]),
}


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    out: Optional[str] = None
    gnuplot_script: Optional[str] = None


def _read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    return _build()[0]


def _build():
    subs = {}
    parser = argparse.ArgumentParser(prog="qdamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (desc, params) in COMMANDS.items():
        p = subs[name] = sub.add_parser(name, help=desc, description=desc)
        p.add_argument("--config", help="file of 'key = value' lines; flags override it")
        p.add_argument("--out", help="output CSV path (default: standard output)")
        p.add_argument("--gnuplot-script", help="also write a gnuplot script for the CSV")
        for prm in params:
            flag = "--" + prm.name
            extra = " (required)" if prm.required else (
                f" (default {prm.default})" if prm.default not in (None, ()) else "")
            p.add_argument(flag, dest=prm.dest, type=str, default=None,
                           choices=prm.choices, help=prm.help + extra)
    return parser, subs


def parse_args(argv) -> RunConfig:
    """Parse ``argv`` into a validated :class:`RunConfig`; exits with code 2 on bad input."""
    parser, subs = _build()
    ns = parser.parse_args(argv)
    sub = subs[ns.command]
    params = COMMANDS[ns.command][1]
    known = {p.dest: p for p in params}
    raw: dict[str, str] = {}
    if ns.config:
        try:
            file_values = _read_config(ns.config)
        except (OSError, ValueError) as exc:
            sub.error(f"cannot read config: {exc}")
        for key in ("out", "gnuplot_script"):
            if key in file_values and getattr(ns, key) is None:
                setattr(ns, key, file_values[key])
            file_values.pop(key, None)
        for key in file_values:
            if key not in known:
                sub.error(f"unknown key {key!r} in {ns.config}; valid keys: {', '.join(sorted(known))}")
        raw.update(file_values)
    for dest in known:
        if getattr(ns, dest) is not None:
            raw[dest] = getattr(ns, dest)

    values: dict[str, Any] = {}
    for prm in params:
        flag = "--" + prm.name
        if prm.dest not in raw:
            if prm.required:
                sub.error(f"missing required {flag}; pass {flag} VALUE or set "
                          f"'{prm.dest} = VALUE' in a --config file")
            values[prm.dest] = prm.default
            continue
        text = raw[prm.dest]
        if prm.choices and text not in prm.choices:
            sub.error(f"{flag} must be one of {', '.join(prm.choices)}, got {text!r}")
        try:
            v = prm.type(text)
        except ValueError as exc:
            sub.error(f"{flag}: cannot parse {text!r} ({exc}); remedy: give a valid "
                      f"{getattr(prm.type, '__name__', 'value')}")
        if prm.check == "pos" and not v > 0:
            sub.error(f"{flag} must be > 0, got {text}")
        if prm.check == "nonneg" and not v >= 0:
            sub.error(f"{flag} must be >= 0, got {text}")
        values[prm.dest] = v
    if ns.gnuplot_script and not ns.out:
        sub.error("--gnuplot-script needs --out so the script can refer to the CSV file")
    return RunConfig(ns.command, values, ns.out, ns.gnuplot_script)


def _times(tmax: float, dt: float) -> np.ndarray:
    n = int(round(tmax / dt))
    if abs(n * dt - tmax) > 1e-9 * max(tmax, dt):
        raise ValueError(f"tmax = {tmax} is not a multiple of dt = {dt}")
    return dt * np.arange(n + 1)


def _cmd_kernel(p, stream):
    spec = coupling.CouplingSpec.ohmic(p["beta"], p["cutoff"])
    coupling.kernel_table(spec, p["tmax"], p["dt"]).to_csv(stream)


def _cmd_trajectory(p, stream):
    potential = dynamics.Potential(p["potential"])
    params = dynamics.OscillatorParams(p["m"], p["omega"], p["beta"], potential)
    times = _times(p["tmax"], p["dt"])
    if p["method"] == "closed-form":
        traj = dynamics.mean_trajectory_ho(params, p["q0"], p["p0"], times)
    else:
        if p["cutoff"] is None:
            kern = coupling.MemoryKernelTable.delta(p["beta"], p["dt"], len(times))
        elif p["beta"] == 0:
            kern = coupling.MemoryKernelTable(p["dt"], np.zeros(len(times)), p["cutoff"])
        else:
            spec = coupling.CouplingSpec.ohmic(p["beta"], p["cutoff"])
            kern = coupling.kernel_table(spec, p["tmax"], p["dt"])
        traj = dynamics.solve_mean_path(params, kern, p["q0"], p["p0"], times)
    traj.to_csv(stream)


def _cmd_energies(p, stream):
    base = {k: p[k] for k in ("n", "omega", "m", "beta")}
    if p["sweep"] is None:
        name, values = "n", [base["n"]]
    else:
        if not p["values"]:
            raise ValueError("--sweep needs --values")
        name, values = p["sweep"], list(p["values"])
    rows = []
    for v in values:
        args = dict(base, **{name: int(v) if name == "n" else v})
        eq = spectra.asymptotic_bath_energy(args["n"], args["omega"], args["m"], args["beta"])
        ec = spectra.asymptotic_bath_energy(args["n"], args["omega"], args["m"], args["beta"],
                                            method="closed_form")
        rows.append((name, v, eq, ec))
    spectra.write_sweep_csv(stream, rows)


def _cmd_rates(p, stream):
    n, omega, m, beta, temp = p["n"], p["omega"], p["m"], p["beta"], p["T"]
    if p["quanta"]:
        if p["t"] is None:
            raise ValueError("--quanta needs the elapsed time --t")
        rep = transitions.rates_fock_bath(n, p["quanta"], omega, m, beta, p["t"])
    elif temp > 0:
        rep = transitions.rates_thermal(n, omega, m, beta, temp)
    else:
        cutoff = p["cutoff"] if p["cutoff"] is not None else 20 * omega
        rep = transitions.decay_rate_vacuum(n, omega, m, coupling.CouplingSpec.ohmic(beta, cutoff))
    transitions.write_rates_csv(stream, [(n, omega, m, beta, temp, rep)])


def _cmd_bath_sim(p, stream):
    params = dynamics.OscillatorParams(p["m"], p["omega"], p["beta"])
    spec = coupling.CouplingSpec.ohmic(p["beta"], p["cutoff"])
    grid = bath_oracle.build_mode_grid(spec, p["N"], bath_oracle.GridStrategy(p["grid"]))
    if p["init"] == "thermal":
        bath = bath_oracle.BathInitState.thermal(p["T"])
    elif p["init"] == "quanta":
        bath = bath_oracle.BathInitState.with_quanta(p["quanta"])
    else:
        bath = bath_oracle.BathInitState.vacuum()
    system = bath_oracle.build_generator(params, grid)
    state = bath_oracle.init_state(params, grid, p["n"], bath)
    times = _times(p["tmax"], p["dt"])
    if times[-1] > grid.recurrence_time:
        print(f"warning: tmax exceeds the recurrence time {grid.recurrence_time:.6g}; "
              "the finite reservoir will return energy", file=sys.stderr)
    series = bath_oracle.energy_series(system, state, times, normal_order=p["normal_order"])
    series.to_csv(stream)


def _cmd_field(p, stream):
    spec = coupling.CouplingSpec.ohmic(p["beta"], p["cutoff"])
    r = _times(p["rmax"], p["dr"])
    kg.source_profiles(spec, r).to_csv(stream)


_DISPATCH = {
    "kernel": _cmd_kernel,
    "trajectory": _cmd_trajectory,
    "energies": _cmd_energies,
    "rates": _cmd_rates,
    "bath-sim": _cmd_bath_sim,
    "field": _cmd_field,
}


def gnuplot_script(csv_path: str, columns: list[str]) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{columns[0]}'",
        f"plot for [i=2:{len(columns)}] '{csv_path}' using 1:i with lines",
        "",
    ]
    return "\n".join(lines)


def run(config: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit code."""
    buf = io.StringIO()
    try:
        _DISPATCH[config.command](config.params, buf)
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (QdampError, ValueError, IndexError) as exc:
        print(f"qdamp {config.command}: error: {exc}", file=sys.stderr)
        return 2
    text = buf.getvalue()
    if config.out:
        Path(config.out).write_text(text)
        if config.gnuplot_script:
            header = text.splitlines()[0].split(",")
            Path(config.gnuplot_script).write_text(gnuplot_script(config.out, header))
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
