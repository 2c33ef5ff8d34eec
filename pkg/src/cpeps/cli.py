"""Command-line driver.

    cpeps [--config PATH] [--out DIR] [--threads N] [--seed N] COMMAND [options]

Each command resolves its settings from the optional key-value config file
and from command options (options win), rejects unknown keys, and writes CSV
files whose comment header echoes the resolved settings, the package
version and a timestamp.  Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import datetime as _dt
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .approximants import omega_free, pade_sqrt, sup_error
from .ctns_bridge import (
    CTNSGaussianData,
    cpeps_to_ctns,
    ctns_to_cpeps_kernel,
    data_max_abs_diff,
    params_max_abs_diff,
)
from .errors import ConfigError, CPEPSError, NonPhysical, NumericalError
from .fidelity import CSV_HEADER, fidelity_report, finite_lattice_log_fidelity, finite_lattice_per_site
from .gaussian_core import (
    RationalDispersion,
    derive_cf_params,
    dispersion_many,
    params_to_rational,
    rational_eval,
)
from .lattice_symmetry import CONVERGENCE_HEADER, convergence_rows, richardson_ratios
from .optimizer import (
    RESULT_HEADER,
    TRACE_HEADER,
    OptimizationProblem,
    optimize_universal_per_site,
)
from . import serialization as ser

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 2, 3, 4
DISPERSION_POINTS = 512


# --------------------------------------------------------------------------
# config resolution


def _resolve(ctx, command, schema, overrides):
    """Merge config-file values and command options according to ``schema``.

    ``schema`` maps key -> (parser, default); a default of ``...`` marks a
    required key.  Returns an ordered dict of parsed values plus the raw
    strings for the output header.
    """
    g = ctx.obj
    file_kv = {}
    base = Path.cwd()
    if g["config"] is not None:
        file_kv = ser.read_key_values(g["config"])
        base = Path(g["config"]).resolve().parent
        unknown = set(file_kv) - set(schema)
        if unknown:
            raise ConfigError(f"unknown keys for {command}: {', '.join(sorted(unknown))}")
    raw = {}
    for key, (_, default) in schema.items():
        if overrides.get(key) is not None:
            raw[key] = str(overrides[key])
        elif key in file_kv:
            raw[key] = file_kv[key]
        elif default is not ...:
            raw[key] = None if default is None else str(default)
        else:
            raise ConfigError(f"missing setting {key!r} for {command}")
    parsed = {}
    for key, (parser, _) in schema.items():
        if raw[key] is None:
            parsed[key] = None
            continue
        try:
            parsed[key] = parser(raw[key])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    parsed["_base"] = base
    return parsed, raw


def _float_list(s):
    return [float(t) for t in s.replace(",", " ").split()]


def _int_list(s):
    return [int(t) for t in s.replace(",", " ").split()]


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return s
    return parse


def _header(command, raw, g):
    lines = [f"# cpeps {__version__}", f"# command = {command}"]
    for key, value in raw.items():
        if value is not None:
            lines.append(f"# {key} = {value}")
    if g["seed"] is not None:
        lines.append(f"# seed = {g['seed']}")
    lines.append(f"# timestamp = {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    return lines


def _write_csv(g, name, header_lines, columns, rows):
    text = "\n".join(header_lines + [columns] + list(rows)) + "\n"
    path = Path(g["out"]) / name
    ser.atomic_write(path, text)
    return path


def _load_dispersion(source, base):
    """``free``, ``cf:<depth>`` or a parameter / rational-dispersion file."""
    if source == "free":
        return None
    if source.startswith("cf:"):
        return params_to_rational(derive_cf_params(1.0, int(source[3:])))
    kv = ser.read_key_values(_path(source, base))
    if "num" in kv:
        return ser.rational_from_text(ser.dump_key_values(kv.items()))
    return params_to_rational(ser.params_from_dict(kv))


def _load_params(source, base):
    if source.startswith("cf:"):
        depth, _, mass = source[3:].partition(":")
        return derive_cf_params(float(mass or 1.0), int(depth))
    return ser.params_from_dict(ser.read_key_values(_path(source, base)))


def _path(p, base):
    p = Path(p)
    return p if p.is_absolute() else base / p


def _fmt(x):
    return f"{x:.17g}"


# --------------------------------------------------------------------------
# commands


def _global_options(f):
    f = click.option("--seed", "seed", type=int, default=None, help="Random seed.")(f)
    f = click.option("--threads", "threads", type=int, default=None, help="Worker threads.")(f)
    f = click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                     help="Output directory.")(f)
    f = click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
                     help="Key-value config file.")(f)
    return f


def _merge_globals(ctx, config, out, threads, seed):
    g = ctx.obj
    for key, val in (("config", config), ("out", out), ("threads", threads), ("seed", seed)):
        if val is not None:
            g[key] = val
    Path(g["out"]).mkdir(parents=True, exist_ok=True)
    return g


@click.group()
@_global_options
@click.version_option(__version__, prog_name="cpeps")
@click.pass_context
def cli(ctx, config, out, threads, seed):
    """Gaussian cPEPS experiments."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, out=out or ".", threads=threads or 1, seed=seed)


@cli.command()
@click.option("--m", "m", type=str, default=None, help="Mass.")
@click.option("--D", "D", type=str, default=None, help="CF depth or Padé order.")
@click.option("--mode", type=str, default=None, help="cf or pade.")
@click.option("--u0", type=str, default=None, help="Padé base point in k^2.")
@click.option("--Lambda", "Lambda", type=str, default=None, help="Cutoff.")
@_global_options
@click.pass_context
def approximate(ctx, m, D, mode, u0, Lambda, **glob):
    """Tabulate a continued-fraction or Padé dispersion against the free one."""
    g = _merge_globals(ctx, **glob)
    schema = {"m": (float, 1.0), "D": (int, 1), "mode": (_choice("cf", "pade"), "cf"),
              "u0": (float, 0.0), "Lambda": (float, 10.0)}
    cfg, raw = _resolve(ctx, "approximate", schema, dict(m=m, D=D, mode=mode, u0=u0, Lambda=Lambda))
    if cfg["mode"] == "cf":
        if cfg["D"] == 0:
            R = RationalDispersion([cfg["m"]], [1.0], physical=True)
        else:
            R = params_to_rational(derive_cf_params(cfg["m"], cfg["D"]))
    else:
        R = pade_sqrt(cfg["m"], cfg["u0"], cfg["D"])
    if not R.physical:
        try:
            R = R.as_physical(cfg["Lambda"] ** 2)
        except NonPhysical:
            pass  # tabulated as is; the flag stays off
    k = np.arange(DISPERSION_POINTS) * cfg["Lambda"] / DISPERSION_POINTS
    w = rational_eval(R, k * k).real
    wf = omega_free(cfg["m"], k * k)
    header = _header("approximate", raw, g)
    rows = [f"{_fmt(a)},{_fmt(b)},{_fmt(c)},{_fmt(abs(b - c))}" for a, b, c in zip(k, w, wf)]
    _write_csv(g, "dispersion.csv", header, "k,omega_D,omega_f,abs_err", rows)
    ser.atomic_write(Path(g["out"]) / "rational.txt", ser.rational_to_text(R))
    err = sup_error(R, cfg["m"], cfg["Lambda"])
    _write_csv(g, "summary.csv", header, "m,D,mode,u0,Lambda,sup_error",
               [f"{_fmt(cfg['m'])},{cfg['D']},{cfg['mode']},{_fmt(cfg['u0'])},"
                f"{_fmt(cfg['Lambda'])},{_fmt(err)}"])


@cli.command()
@click.option("--params", type=str, default=None, help="free, cf:<depth> or a parameter file.")
@click.option("--m", "m", type=str, default=None)
@click.option("--d", "d", type=str, default=None)
@click.option("--Lambda", "Lambda", type=str, default=None, help="Cutoff(s), comma separated.")
@click.option("--N", "N", type=str, default=None, help="Sites per axis, comma separated.")
@_global_options
@click.pass_context
def fidelity(ctx, params, m, d, Lambda, N, **glob):
    """Fidelity per site of a dispersion against the free vacuum."""
    g = _merge_globals(ctx, **glob)
    schema = {"params": (str, ...), "m": (float, 1.0), "d": (int, 1),
              "Lambda": (_float_list, 10.0), "N": (_int_list, None)}
    cfg, raw = _resolve(ctx, "fidelity", schema, dict(params=params, m=m, d=d, Lambda=Lambda, N=N))
    R = _load_dispersion(cfg["params"], cfg["_base"])
    mass = cfg["m"]
    if R is None:
        R = lambda u: omega_free(mass, u)  # noqa: E731
    header = _header("fidelity", raw, g)
    rows = [fidelity_report(R, mass, cfg["d"], L).csv_row() for L in cfg["Lambda"]]
    _write_csv(g, "fidelity.csv", header, CSV_HEADER, rows)
    if cfg["N"]:
        lrows = []
        for L in cfg["Lambda"]:
            cont = fidelity_report(R, mass, cfg["d"], L).per_site
            for n in cfg["N"]:
                total = finite_lattice_log_fidelity(R, mass, cfg["d"], L, n)
                fin = finite_lattice_per_site(R, mass, cfg["d"], L, n)
                lrows.append(f"{cfg['d']},{_fmt(L)},{_fmt(mass)},{n},{_fmt(total)},"
                             f"{_fmt(fin)},{_fmt(cont)},{_fmt(abs(fin - cont))}")
        _write_csv(g, "finite_lattice.csv", header,
                   "d,Lambda,m,N,total_log_fidelity,per_site_finite,per_site_continuum,abs_diff",
                   lrows)


def _init_choice(s):
    if s in ("pade", "cf") or s.startswith("file:"):
        return s
    raise ValueError("must be pade, cf or file:<path>")


@cli.command()
@_global_options
@click.pass_context
def optimize(ctx, **glob):
    """Maximise the universal per-site log fidelity (settings from --config)."""
    g = _merge_globals(ctx, **glob)
    schema = {"d": (int, 1), "D": (int, 1), "max_iter": (int, 2000), "tol": (float, 1e-8),
              "restarts": (int, 1), "seed": (int, 0), "init": (_init_choice, "pade")}
    cfg, raw = _resolve(ctx, "optimize", schema, {"seed": g["seed"]})
    problem = OptimizationProblem(cfg["d"], cfg["D"])
    init = cfg["init"]
    if init.startswith("file:"):
        Rt = ser.rescaled_from_text(_path(init[5:], cfg["_base"]).read_text(encoding="utf-8"))
        init = (Rt.tilde_num, Rt.tilde_den)
    res = optimize_universal_per_site(problem, init, max_iter=cfg["max_iter"], tol=cfg["tol"],
                                      restarts=cfg["restarts"], seed=cfg["seed"],
                                      threads=g["threads"])
    header = _header("optimize", raw, {**g, "seed": None})
    _write_csv(g, "optimize.csv", header, RESULT_HEADER, [res.csv_row(problem)])
    _write_csv(g, "trace.csv", header, TRACE_HEADER, res.trace_rows())


@cli.command()
@_global_options
@click.pass_context
def lattice(ctx, **glob):
    """Lattice-to-continuum convergence of the dispersion (settings from --config)."""
    g = _merge_globals(ctx, **glob)
    schema = {"d": (int, 1), "epsilon": (_float_list, "0.2 0.1 0.05"), "N": (int, 32),
              "dim_chi": (float, None), "params": (str, "cf:2"), "k": (float, None)}
    cfg, raw = _resolve(ctx, "lattice", schema, {})
    P = _load_params(cfg["params"], cfg["_base"])
    eps = cfg["epsilon"]
    length = cfg["N"] * eps[0]
    k = cfg["k"] if cfg["k"] is not None else 2.0 * math.pi / length
    rows = convergence_rows(P, cfg["d"], eps, k, length, cfg["dim_chi"])
    header = _header("lattice", raw, g)
    _write_csv(g, "convergence.csv", header, CONVERGENCE_HEADER,
               [",".join(_fmt(v) for v in r) for r in rows])
    ratios = richardson_ratios([r[4] for r in rows])
    _write_csv(g, "richardson.csv", header, "epsilon_coarse,epsilon_fine,ratio",
               [f"{_fmt(eps[i])},{_fmt(eps[i + 1])},{_fmt(q)}" for i, q in enumerate(ratios)])


def _random_data(rng, D):
    V = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    kin = rng.normal(size=(D, D))
    return CTNSGaussianData(V + V.T, rng.normal(size=D), kin + kin.T, rng.normal(size=D),
                            None, rng.uniform(0.5, 2.0))


@cli.command()
@click.option("--params", type=str, default=None,
              help="Parameter or CTNS data file; omit for random trials.")
@_global_options
@click.pass_context
def ctns(ctx, params, **glob):
    """Convert between cPEPS parameters and CTNS data and verify the round trip."""
    g = _merge_globals(ctx, **glob)
    schema = {"params": (str, None), "trials": (int, 50), "D": (int, 3)}
    cfg, raw = _resolve(ctx, "ctns", schema, {"params": params})
    u = np.linspace(0.1, 10.0, 10)
    rows = []
    header = _header("ctns", raw, g)
    if cfg["params"] is not None:
        kv = ser.read_key_values(_path(cfg["params"], cfg["_base"]))
        if "f" in kv:
            data = ser.ctns_from_text(ser.dump_key_values(kv.items()))
            P = ctns_to_cpeps_kernel(data)
        else:
            P = ser.params_from_dict(kv)
        cases = [P]
    else:
        rng = np.random.default_rng(g["seed"] if g["seed"] is not None else 0)
        cases = [ctns_to_cpeps_kernel(_random_data(rng, cfg["D"])) for _ in range(cfg["trials"])]
    for i, P in enumerate(cases):
        data = cpeps_to_ctns(P)
        back = ctns_to_cpeps_kernel(data)
        err = max(params_max_abs_diff(P, back), data_max_abs_diff(data, cpeps_to_ctns(back)))
        w0, w1 = dispersion_many(P, u), dispersion_many(back, u)
        disp = float(np.max(np.abs(w1 - w0) / np.maximum(np.abs(w0), 1e-300)))
        rows.append(f"{i},{P.D},{_fmt(err)},{_fmt(disp)}")
        if i == 0:
            ser.atomic_write(Path(g["out"]) / "ctns.txt", ser.ctns_to_text(data))
    _write_csv(g, "roundtrip.csv", header, "case,D,roundtrip_max_abs_err,dispersion_max_rel_err",
               rows)


# --------------------------------------------------------------------------


def main(argv=None):
    """Entry point mapping exceptions onto the exit-code contract."""
    try:
        cli.main(args=argv, prog_name="cpeps", standalone_mode=False, obj={})
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except click.Abort:
        return 1
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERICAL
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except (CPEPSError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
