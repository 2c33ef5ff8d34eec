"""Key-value text schema shared by parameter files, configs and outputs.

One ``key = value`` pair per line, UTF-8, ``#`` starts a comment.  Array
values are whitespace-separated entries, matrices in row-major order with the
shape implied by ``D``.  A real entry is a plain number; a complex entry is
written ``re,im``.  Numbers are written with 17 significant digits so that a
write/read cycle is exact.

Keys by object:

* ``GaussianParams``: ``D``, ``m`` (optional), ``Z``, ``A``, ``z``, ``a``, ``c``
* ``RationalDispersion``: ``num``, ``den``, ``base_point``, ``physical``
* ``RescaledDispersion``: ``tilde_num``, ``tilde_den``, ``Lambda_used``
* ``CTNSGaussianData``: ``V``, ``f``, ``kin``, and optionally ``f_grad``,
  ``V2``, ``scale``
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .ctns_bridge import CTNSGaussianData
from .errors import ConfigError
from .fidelity import RescaledDispersion
from .gaussian_core import GaussianParams, RationalDispersion


def format_number(x) -> str:
    """``%.17g`` for reals, ``re,im`` for complex values with a non-zero imaginary part."""
    x = complex(x)
    if x.imag == 0:
        return f"{x.real:.17g}"
    return f"{x.real:.17g},{x.imag:.17g}"


def format_array(arr) -> str:
    return " ".join(format_number(v) for v in np.asarray(arr).reshape(-1))


def parse_number(tok: str) -> complex:
    try:
        if "," in tok:
            re_, im_ = tok.split(",")
            return complex(float(re_), float(im_))
        return complex(float(tok))
    except ValueError as exc:
        raise ConfigError(f"cannot parse number {tok!r}") from exc


def parse_array(text: str, shape=None, real=False):
    vals = np.array([parse_number(t) for t in text.split()], dtype=complex)
    if shape is not None:
        if vals.size != int(np.prod(shape)):
            raise ConfigError(f"expected {int(np.prod(shape))} entries, got {vals.size}")
        vals = vals.reshape(shape)
    if real:
        if np.any(vals.imag != 0):
            raise ConfigError("expected real entries")
        return vals.real
    return vals


def parse_key_values(text: str) -> dict:
    """Ordered ``{key: raw value}`` mapping; duplicate keys are an error."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_key_values(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not UTF-8") from exc
    return parse_key_values(text)


def dump_key_values(pairs, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"{k} = {v}" for k, v in pairs]
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str):
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_keys(kv, allowed, required):
    unknown = set(kv) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    missing = set(required) - set(kv)
    if missing:
        raise ConfigError(f"missing keys: {', '.join(sorted(missing))}")


def _parse_int(v, key):
    try:
        return int(v)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer") from exc


# --------------------------------------------------------------------------

def params_to_text(P: GaussianParams) -> str:
    pairs = [("D", str(P.D))]
    if P.m is not None:
        pairs.append(("m", format_number(P.m)))
    pairs += [("Z", format_array(P.Z)), ("A", format_array(P.A)), ("z", format_array(P.z)),
              ("a", format_array(P.a)), ("c", format_number(P.c))]
    return dump_key_values(pairs)


def params_from_dict(kv) -> GaussianParams:
    _check_keys(kv, ("D", "m", "Z", "A", "z", "a", "c"), ("D", "Z", "A", "z", "a", "c"))
    D = _parse_int(kv["D"], "D")
    m = parse_number(kv["m"]).real if "m" in kv else None
    return GaussianParams(
        D, parse_array(kv["Z"], (D, D)), parse_array(kv["A"], (D, D)),
        parse_array(kv["z"], (D,)), parse_array(kv["a"], (D,)),
        parse_number(kv["c"]), m=m,
    )


def params_from_text(text: str) -> GaussianParams:
    return params_from_dict(parse_key_values(text))


def rational_to_text(R: RationalDispersion) -> str:
    return dump_key_values([
        ("num", format_array(R.num)), ("den", format_array(R.den)),
        ("base_point", format_number(R.base_point)), ("physical", str(bool(R.physical)).lower()),
    ])


def _parse_bool(v, key):
    if v.lower() in ("true", "1", "yes"):
        return True
    if v.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key} must be true or false")


def rational_from_text(text: str) -> RationalDispersion:
    kv = parse_key_values(text)
    _check_keys(kv, ("num", "den", "base_point", "physical"), ("num", "den"))
    return RationalDispersion(
        parse_array(kv["num"]), parse_array(kv["den"]),
        parse_number(kv.get("base_point", "0")).real,
        _parse_bool(kv.get("physical", "false"), "physical"),
    )


def rescaled_to_text(Rt: RescaledDispersion) -> str:
    return dump_key_values([
        ("tilde_num", format_array(Rt.tilde_num)), ("tilde_den", format_array(Rt.tilde_den)),
        ("Lambda_used", format_number(Rt.Lambda_used)),
    ])


def rescaled_from_text(text: str) -> RescaledDispersion:
    kv = parse_key_values(text)
    _check_keys(kv, ("tilde_num", "tilde_den", "Lambda_used"), ("tilde_num", "tilde_den"))
    return RescaledDispersion(
        parse_array(kv["tilde_num"], real=True), parse_array(kv["tilde_den"], real=True),
        parse_number(kv.get("Lambda_used", "1")).real,
    )


def ctns_to_text(data: CTNSGaussianData) -> str:
    return dump_key_values([
        ("V", format_array(data.V)), ("f", format_array(data.f)), ("kin", format_array(data.kin)),
        ("f_grad", format_array(data.f_grad)), ("V2", format_array(data.V2)),
        ("scale", format_number(data.scale)),
    ])


def ctns_from_text(text: str) -> CTNSGaussianData:
    kv = parse_key_values(text)
    _check_keys(kv, ("V", "f", "kin", "f_grad", "V2", "scale"), ("V", "f", "kin"))
    f = parse_array(kv["f"])
    D = f.size
    return CTNSGaussianData(
        parse_array(kv["V"], (D, D)), f, parse_array(kv["kin"], (D, D)),
        parse_array(kv["f_grad"], (D,)) if "f_grad" in kv else None,
        parse_array(kv["V2"], (D, D)) if "V2" in kv else None,
        parse_number(kv.get("scale", "1")).real,
    )
