"""Command-line front end: config parsing, pipelines, CSV artifacts.

Usage:
    jacobi-spectra <command> --config FILE [--set key=value]...

Commands: eigs, cdf, spectrum, gaps, moments, crosscheck, butterfly.

Config grammar (line oriented, '#' comments, one `key = value` per line).
Run-level keys live at the top; the `[potential]` section describes the
diagonal sequence and extends to the end of the file or to a `[run]`
header, which switches back to run-level keys:

    schedule = 256, 512, 1024     # matrix sizes n (crosscheck: radii m)
    grid_min = -4.2               # default: +-(bound+2) padded by 0.1
    grid_max = 4.2
    grid_points = 1001
    tol = 1e-10                   # eigenvalue certification tolerance
    h = 0.05                      # classification window half-width
    density_floor = 1e-3          # IN threshold on N_n/n
    gap_cap = 8                   # GAP cap on max_n N_n
    max_order = 6                 # highest moment order
    window_radius = 100000        # trace-moment averaging radius
    moment_tol = 0.01             # optional flat flag threshold (default scaled)
    offsets = 0, 100, -100        # mean uniformity probes (optional)
    period_bound = 10000          # periodicity scan bound
    period_tol = 1e-9
    theta_min = 0.1               # butterfly sweep
    theta_max = 3.1
    theta_count = 32
    threads = 0                   # 0 = auto; env JACOBI_SPECTRA_THREADS fallback
    output_path = out.csv         # butterfly: a directory

    [potential]
    kind = cosine_composed | trig_polynomial | constant | explicit
    coeffs = c0, c1, ...          # cosine_composed: v ascending coefficients
    theta = 1.0                   # cosine_composed: angle in radians
    terms = amp,freq,phase; ...   # trig_polynomial: semicolon-separated triples
    value = 1.5                   # constant
    samples = 7, 8, 9             # explicit
    origin = -1                   # explicit: bilateral index of samples[0]

`--set key=value` (repeatable) overrides file keys; potential keys are
addressed as `potential.theta` etc.  Schedules are best chosen geometric
(n, 2n, 4n, ...) so the recorded Cauchy differences mean something.

Every output file starts with a comment block echoing the resolved config
and the version.  `threads` and `output_path` are deliberately left out of
the echo: they cannot affect numeric content, and files produced with
different worker counts must stay byte-identical.

Exit codes: 0 success, 2 invalid config (message names the offending key),
3 numerical certification failure (message carries the offending value).
"""

from __future__ import annotations

import dataclasses
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .potentials import (ExplicitOutOfRange, PotentialSpec, default_mean_offsets,
                         periodicity_check, von_neumann_mean)
from .specmeasure import (UnresolvedEndpoint, bilateral_crosscheck,
                          classify_spectrum, estimate_distribution,
                          gap_intervals, moment_match)
from .tridiag import (TolTooSmall, build_unilateral, eigenvalues,
                      eigenvalues_to_csv)

__all__ = ["ConfigError", "RunConfig", "load_config", "potential_to_config",
           "run", "main"]

COMMANDS = ("eigs", "cdf", "spectrum", "gaps", "moments", "crosscheck", "butterfly")

_GRID_COMMANDS = ("cdf", "spectrum", "gaps", "crosscheck", "butterfly")

_TOP_KEYS = ("command", "schedule", "grid_min", "grid_max", "grid_points", "tol",
             "h", "density_floor", "gap_cap", "max_order", "window_radius",
             "moment_tol", "offsets", "period_bound", "period_tol", "theta_min",
             "theta_max", "theta_count", "threads", "output_path")

_POTENTIAL_KEYS = {
    "cosine_composed": ("kind", "coeffs", "theta"),
    "trig_polynomial": ("kind", "terms"),
    "constant": ("kind", "value"),
    "explicit": ("kind", "samples", "origin"),
}


class ConfigError(Exception):
    """Invalid configuration; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: PotentialSpec
    schedule: tuple[int, ...]
    grid_min: float
    grid_max: float
    grid_points: int
    tol: float
    h: float
    density_floor: float
    gap_cap: int
    max_order: int
    window_radius: int
    moment_tol: float | None
    offsets: tuple[int, ...] | None
    period_bound: int
    period_tol: float
    theta_min: float | None
    theta_max: float | None
    theta_count: int | None
    threads: int
    output_path: str

    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.grid_points)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, str]:
    """Flatten a config file into {key or 'potential.key': raw value}."""
    raw: dict[str, str] = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if name == "potential":
                section = "potential."
            elif name == "run":
                section = ""
            else:
                raise ConfigError(name, f"unknown section [{name}] at line {lineno}")
            continue
        if "=" not in stripped:
            raise ConfigError(stripped.split()[0] if stripped.split() else "",
                              f"line {lineno}: expected `key = value`")
        key, _, value = stripped.partition("=")
        full = section + key.strip()
        if full in raw:
            raise ConfigError(full, "duplicate key")
        raw[full] = value.strip()
    return raw


def _float(raw: dict[str, str], key: str, default: float | None) -> float | None:
    if key not in raw:
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw[key]!r}") from None


def _int(raw: dict[str, str], key: str, default: int | None) -> int | None:
    if key not in raw:
        return default
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw[key]!r}") from None


def _num_list(raw: dict[str, str], key: str, kind=float) -> tuple | None:
    if key not in raw:
        return None
    items = [s for s in (p.strip() for p in raw[key].split(",")) if s]
    try:
        return tuple(kind(s) for s in items)
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {raw[key]!r}") from None


def _terms(raw: dict[str, str], key: str) -> tuple[tuple[float, float, float], ...] | None:
    if key not in raw:
        return None
    out = []
    for part in raw[key].split(";"):
        part = part.strip()
        if not part:
            continue
        nums = [s.strip() for s in part.split(",")]
        if len(nums) != 3:
            raise ConfigError(key, f"each term needs amp,freq,phase; got {part!r}")
        try:
            out.append(tuple(float(s) for s in nums))
        except ValueError:
            raise ConfigError(key, f"expected numbers in term {part!r}") from None
    return tuple(out)


def _build_potential(raw: dict[str, str], command: str,
                     theta_min: float | None) -> PotentialSpec:
    kind = raw.get("potential.kind")
    if kind is None:
        raise ConfigError("potential.kind", "potential section requires a kind")
    if kind not in _POTENTIAL_KEYS:
        raise ConfigError("potential.kind", f"unknown kind {kind!r}")
    allowed = _POTENTIAL_KEYS[kind]
    for key in raw:
        if key.startswith("potential."):
            short = key.split(".", 1)[1]
            if short not in allowed:
                raise ConfigError(key, f"not a valid key for kind {kind}")
    try:
        if kind == "cosine_composed":
            coeffs = _num_list(raw, "potential.coeffs")
            if coeffs is None:
                raise ConfigError("potential.coeffs", "required for cosine_composed")
            theta = _float(raw, "potential.theta", None)
            if theta is None:
                if command == "butterfly" and theta_min is not None:
                    theta = theta_min  # placeholder; the sweep overrides it
                else:
                    raise ConfigError("potential.theta", "required for cosine_composed")
            return PotentialSpec.cosine(coeffs, theta)
        if kind == "trig_polynomial":
            terms = _terms(raw, "potential.terms")
            if terms is None:
                raise ConfigError("potential.terms", "required for trig_polynomial")
            return PotentialSpec.trig(terms)
        if kind == "constant":
            value = _float(raw, "potential.value", None)
            if value is None:
                raise ConfigError("potential.value", "required for constant")
            return PotentialSpec.const(value)
        samples = _num_list(raw, "potential.samples")
        if samples is None:
            raise ConfigError("potential.samples", "required for explicit")
        origin = _int(raw, "potential.origin", 0)
        return PotentialSpec.explicit(samples, origin)
    except ValueError as exc:
        raise ConfigError(f"potential.{kind}", str(exc)) from None


def _resolve_threads(raw: dict[str, str]) -> int:
    if "threads" in raw:
        return _int(raw, "threads", 0)
    env = os.environ.get("JACOBI_SPECTRA_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("threads",
                              f"JACOBI_SPECTRA_THREADS={env!r} is not an integer") from None
    return 0


def build_config(command: str, raw: dict[str, str]) -> RunConfig:
    """Resolve raw key/value pairs into a validated RunConfig."""
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    if raw.get("command", command) != command:
        raise ConfigError("command",
                          f"file says {raw['command']!r} but the subcommand is {command!r}")
    for key in raw:
        if not key.startswith("potential.") and key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")

    theta_min = _float(raw, "theta_min", None)
    theta_max = _float(raw, "theta_max", None)
    theta_count = _int(raw, "theta_count", None)
    potential = _build_potential(raw, command, theta_min)

    schedule = _num_list(raw, "schedule", int)
    if not schedule:
        raise ConfigError("schedule", "at least one dimension is required")
    if any(n < 1 for n in schedule):
        raise ConfigError("schedule", "entries must be >= 1")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError("schedule", "entries must be strictly increasing")

    bound = potential.bound()
    grid_min = _float(raw, "grid_min", -(bound + 2.0) - 0.1)
    grid_max = _float(raw, "grid_max", bound + 2.0 + 0.1)
    grid_points = _int(raw, "grid_points", 1001)
    if grid_points < 2:
        raise ConfigError("grid_points", "need at least 2 grid points")
    if not grid_min < grid_max:
        raise ConfigError("grid_min", f"grid_min {grid_min:g} must be < grid_max {grid_max:g}")
    if command in _GRID_COMMANDS:
        if grid_min > -(bound + 2.0):
            raise ConfigError("grid_min",
                              f"must be <= {-(bound + 2.0):g} to cover the spectral interval")
        if grid_max < bound + 2.0:
            raise ConfigError("grid_max",
                              f"must be >= {bound + 2.0:g} to cover the spectral interval")

    tol = _float(raw, "tol", 1e-10)
    if tol <= 0:
        raise ConfigError("tol", "must be positive")
    h = _float(raw, "h", 0.05)
    if h <= 0:
        raise ConfigError("h", "must be positive")
    density_floor = _float(raw, "density_floor", 1e-3)
    if density_floor <= 0:
        raise ConfigError("density_floor", "must be positive")
    gap_cap = _int(raw, "gap_cap", 8)
    if gap_cap < 0:
        raise ConfigError("gap_cap", "must be >= 0")
    max_order = _int(raw, "max_order", 6)
    if max_order < 0:
        raise ConfigError("max_order", "must be >= 0")
    window_radius = _int(raw, "window_radius", 100_000)
    if window_radius <= max_order:
        raise ConfigError("window_radius", f"must exceed max_order = {max_order}")
    moment_tol = _float(raw, "moment_tol", None)
    if moment_tol is not None and moment_tol <= 0:
        raise ConfigError("moment_tol", "must be positive")
    offsets = _num_list(raw, "offsets", int)
    period_bound = _int(raw, "period_bound", 10_000)
    if period_bound < 1:
        raise ConfigError("period_bound", "must be >= 1")
    period_tol = _float(raw, "period_tol", 1e-9)
    if period_tol < 0:
        raise ConfigError("period_tol", "must be >= 0")

    if command == "butterfly":
        if potential.kind != "cosine_composed":
            raise ConfigError("potential.kind", "butterfly requires cosine_composed")
        if theta_min is None or theta_max is None or theta_count is None:
            raise ConfigError("theta_count",
                              "butterfly requires theta_min, theta_max, theta_count")
        if theta_count < 1:
            raise ConfigError("theta_count", "must be >= 1")
        if theta_min > theta_max:
            raise ConfigError("theta_min", "must be <= theta_max")

    threads = _resolve_threads(raw)
    if threads < 0:
        raise ConfigError("threads", "must be >= 0 (0 = auto)")
    default_out = "butterfly_out" if command == "butterfly" else f"{command}.csv"
    output_path = raw.get("output_path", default_out)

    return RunConfig(
        command=command, potential=potential, schedule=schedule,
        grid_min=grid_min, grid_max=grid_max, grid_points=grid_points, tol=tol,
        h=h, density_floor=density_floor, gap_cap=gap_cap, max_order=max_order,
        window_radius=window_radius, moment_tol=moment_tol, offsets=offsets,
        period_bound=period_bound, period_tol=period_tol, theta_min=theta_min,
        theta_max=theta_max, theta_count=theta_count, threads=threads,
        output_path=output_path)


def load_config(command: str, config_path: str,
                overrides: Sequence[str] = ()) -> RunConfig:
    """Read the config file, apply --set overrides, and validate."""
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {config_path}: {exc}") from None
    raw = parse_config_text(text)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, _, value = item.partition("=")
        raw[key.strip()] = value.strip()
    return build_config(command, raw)


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    """Decimal with 17 significant digits: enough to round-trip a double."""
    return format(float(x), ".17g")


def _potential_items(p: PotentialSpec) -> list[tuple[str, str]]:
    items = [("kind", p.kind)]
    if p.kind == "cosine_composed":
        items.append(("coeffs", ",".join(_fmt(c) for c in p.coeffs)))
        items.append(("theta", _fmt(p.theta)))
    elif p.kind == "trig_polynomial":
        items.append(("terms", "; ".join(",".join(_fmt(x) for x in t)
                                         for t in p.terms)))
    elif p.kind == "constant":
        items.append(("value", _fmt(p.value)))
    else:
        items.append(("samples", ",".join(_fmt(s) for s in p.samples)))
        items.append(("origin", str(p.origin)))
    return items


def potential_to_config(p: PotentialSpec) -> str:
    """Serialize a potential as a `[potential]` block that parses back."""
    body = "\n".join(f"{key} = {value}" for key, value in _potential_items(p))
    return f"[potential]\n{body}\n"


def _echo_lines(config: RunConfig) -> list[str]:
    lines = [f"jacobi-spectra {__version__}", f"command = {config.command}"]
    lines += [f"potential.{key} = {value}"
              for key, value in _potential_items(config.potential)]
    lines.append("schedule = " + ",".join(str(n) for n in config.schedule))
    lines.append(f"grid_min = {_fmt(config.grid_min)}")
    lines.append(f"grid_max = {_fmt(config.grid_max)}")
    lines.append(f"grid_points = {config.grid_points}")
    lines.append(f"tol = {_fmt(config.tol)}")
    lines.append(f"h = {_fmt(config.h)}")
    lines.append(f"density_floor = {_fmt(config.density_floor)}")
    lines.append(f"gap_cap = {config.gap_cap}")
    lines.append(f"max_order = {config.max_order}")
    lines.append(f"window_radius = {config.window_radius}")
    if config.moment_tol is not None:
        lines.append(f"moment_tol = {_fmt(config.moment_tol)}")
    if config.offsets is not None:
        lines.append("offsets = " + ",".join(str(k) for k in config.offsets))
    lines.append(f"period_bound = {config.period_bound}")
    lines.append(f"period_tol = {_fmt(config.period_tol)}")
    if config.command == "butterfly":
        lines.append(f"theta_min = {_fmt(config.theta_min)}")
        lines.append(f"theta_max = {_fmt(config.theta_max)}")
        lines.append(f"theta_count = {config.theta_count}")
    return lines


def _write_csv(path: Path, comments: list[str], header: str | None,
               rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in comments:
            handle.write(f"# {line}\n")
        if header is not None:
            handle.write(header + "\n")
        for row in rows:
            handle.write(row + "\n")


# --------------------------------------------------------------------------
# Command runners
# --------------------------------------------------------------------------


def _run_eigs(config: RunConfig, out: Path) -> None:
    n = config.schedule[-1]
    A = build_unilateral(config.potential, n)
    eig = eigenvalues(A, config.tol)
    body = eigenvalues_to_csv(eig, origin=A.origin, tol=config.tol)
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        for line in _echo_lines(config):
            handle.write(f"# {line}\n")
        handle.write(body)


def _run_cdf(config: RunConfig, out: Path) -> None:
    est = estimate_distribution(config.potential, config.schedule, config.grid(),
                                config.tol, threads=config.threads)
    comments = _echo_lines(config)
    for (a, b), sup in zip(zip(est.schedule, est.schedule[1:]), est.cauchy_sup_diffs):
        comments.append(f"cauchy_sup n={a}->{b} = {_fmt(sup)}")
    header = "x," + ",".join(f"n={n}" for n in est.schedule)
    rows = [",".join([_fmt(x)] + [_fmt(v) for v in est.cdfs[:, i]])
            for i, x in enumerate(est.grid)]
    _write_csv(out, comments, header, rows)


def _classification(config: RunConfig, potential: PotentialSpec):
    return classify_spectrum(potential, config.grid(), config.h, config.schedule,
                             config.density_floor, config.gap_cap,
                             threads=config.threads)


def _spectrum_rows(report) -> list[str]:
    return [",".join([_fmt(x), label, _fmt(ev), _fmt(report.h),
                      _fmt(report.density_floor), str(report.gap_cap)])
            for x, label, ev in zip(report.grid, report.labels, report.evidence)]


def _run_spectrum(config: RunConfig, out: Path) -> None:
    report = _classification(config, config.potential)
    _write_csv(out, _echo_lines(config), "x,class,evidence,h,floor,cap",
               _spectrum_rows(report))


def _run_gaps(config: RunConfig, out: Path) -> None:
    report = _classification(config, config.potential)
    comments = _echo_lines(config)
    comments.append("maximal runs of GAP-classified grid points")
    rows = [",".join([_fmt(lo), _fmt(hi), str(cap)])
            for lo, hi, cap in gap_intervals(report)]
    _write_csv(out, comments, "gap_lo,gap_hi,max_count", rows)


def _run_moments(config: RunConfig, out: Path) -> None:
    report = moment_match(config.potential, config.schedule, config.max_order,
                          config.window_radius, tol=config.moment_tol,
                          eig_tol=config.tol)
    comments = _echo_lines(config)
    comments.append("thresholds = " + ",".join(_fmt(t) for t in report.thresholds))
    flagged = [str(int(k)) for k, bad in zip(report.orders, report.flagged) if bad]
    comments.append("flagged orders = " + (",".join(flagged) if flagged else "none"))
    # side diagnostic: the order-1 moment is the diagonal mean, so probe its
    # translation uniformity over the configured offsets
    offsets = config.offsets or default_mean_offsets(config.window_radius)
    try:
        mean = von_neumann_mean(config.potential, config.window_radius, offsets)
        comments.append(f"diagonal_mean = {_fmt(mean.value)}")
        comments.append(f"mean_uniformity_defect = {_fmt(mean.uniformity_defect)}")
    except ExplicitOutOfRange:
        comments.append("diagonal_mean = unavailable "
                        "(explicit samples shorter than the offset window)")
    rows = [",".join([str(int(k)), _fmt(c), _fmt(t), _fmt(d)])
            for k, c, t, d in zip(report.orders, report.cesaro, report.trace,
                                  report.abs_diff)]
    _write_csv(out, comments, "k,cesaro,trace,abs_diff", rows)


def _run_crosscheck(config: RunConfig, out: Path) -> None:
    report = bilateral_crosscheck(config.potential, config.schedule, config.grid(),
                                  threads=config.threads)
    rows = [",".join([str(m), str(dim), _fmt(d)])
            for m, dim, d in zip(report.ms, report.dims, report.sup_distances)]
    _write_csv(out, _echo_lines(config), "m,dim,sup_distance", rows)


def _run_butterfly(config: RunConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.theta_count == 1:
        thetas = np.asarray([config.theta_min])
    else:
        thetas = np.linspace(config.theta_min, config.theta_max, config.theta_count)
    index_rows = []
    for i, theta in enumerate(thetas):
        potential = dataclasses.replace(config.potential, theta=float(theta))
        sub = dataclasses.replace(config, potential=potential)
        report = _classification(sub, potential)
        name = f"spectrum_{i:04d}.csv"
        _write_csv(out_dir / name, _echo_lines(sub), "x,class,evidence,h,floor,cap",
                   _spectrum_rows(report))
        period = periodicity_check(potential, config.period_bound,
                                   config.period_tol).period
        index_rows.append(",".join([_fmt(theta), name, str(period or 0)]))
    comments = _echo_lines(config)
    comments.append("period column: least period found up to period_bound, 0 if none")
    _write_csv(out_dir / "index.csv", comments, "theta,file,period", index_rows)


_RUNNERS = {
    "eigs": _run_eigs,
    "cdf": _run_cdf,
    "spectrum": _run_spectrum,
    "gaps": _run_gaps,
    "moments": _run_moments,
    "crosscheck": _run_crosscheck,
    "butterfly": _run_butterfly,
}


def _print_periodicity_note(config: RunConfig) -> None:
    if config.potential.kind not in ("cosine_composed", "trig_polynomial"):
        return
    if config.command == "butterfly":  # recorded per theta in the index file
        return
    result = periodicity_check(config.potential, config.period_bound,
                               config.period_tol)
    if result.is_periodic:
        print(f"note: diagonal repeats with period {result.period} within "
              f"tol {result.tol:g}; aggregation assumes a nonperiodic sequence",
              file=sys.stderr)
    else:
        print(f"note: no period up to {result.max_period} found "
              f"(tol {result.tol:g}); treating the diagonal as nonperiodic "
              "(finite scan, not a proof)", file=sys.stderr)


def run(config: RunConfig) -> Path:
    """Execute one command; returns the main output path."""
    out = Path(config.output_path)
    _print_periodicity_note(config)
    _RUNNERS[config.command](config, out)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="jacobi-spectra",
        description="spectral distributions of tridiagonal operators with "
                    "almost-periodic diagonals")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="config file path")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override a config key (repeatable)")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.command, args.config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc.key}: {exc}", file=sys.stderr)
        return 2
    try:
        out = run(config)
    except ConfigError as exc:
        print(f"config error: {exc.key}: {exc}", file=sys.stderr)
        return 2
    except (TolTooSmall, UnresolvedEndpoint) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ExplicitOutOfRange) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
