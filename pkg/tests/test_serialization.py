import numpy as np
import pytest

from cpeps import serialization as ser
from cpeps.ctns_bridge import CTNSGaussianData, data_max_abs_diff
from cpeps.errors import ConfigError
from cpeps.fidelity import RescaledDispersion
from cpeps.gaussian_core import RationalDispersion, derive_cf_params
from helpers import random_params


def test_params_roundtrip_exact():
    P = random_params(np.random.default_rng(0), D=3)
    Q = ser.params_from_text(ser.params_to_text(P))
    for name in ("Z", "A", "z", "a"):
        np.testing.assert_array_equal(getattr(Q, name), getattr(P, name))
    assert Q.c == P.c and Q.D == 3


def test_params_text_layout():
    text = ser.params_to_text(derive_cf_params(1.0, 2))
    kv = ser.parse_key_values(text)
    assert list(kv) == ["D", "m", "Z", "A", "z", "a", "c"]
    assert kv["Z"].split()[1] == "0,1"
    assert kv["z"] == "1.4142135623730951 0"


def test_rational_roundtrip():
    R = RationalDispersion([4, 3], [4, 1], physical=True)
    S = ser.rational_from_text(ser.rational_to_text(R))
    np.testing.assert_array_equal(S.num, R.num)
    assert S.physical


def test_rescaled_and_ctns_roundtrip():
    Rt = RescaledDispersion(np.array([0.1, 7.5]), np.array([1.0, 25.0]), 10.0)
    St = ser.rescaled_from_text(ser.rescaled_to_text(Rt))
    np.testing.assert_array_equal(St.tilde_num, Rt.tilde_num)
    data = CTNSGaussianData([[1.0, 0.5j], [0.5j, 2.0]], [0.3, -0.1], np.eye(2), [0.0, 1.0])
    back = ser.ctns_from_text(ser.ctns_to_text(data))
    assert data_max_abs_diff(data, back) == 0.0


def test_parse_errors():
    with pytest.raises(ConfigError):
        ser.parse_key_values("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        ser.parse_key_values("no equals sign\n")
    with pytest.raises(ConfigError):
        ser.params_from_text("D = 1\nZ = 1\nA = 1\nz = 0\na = 0\nc = 1\nextra = 3\n")
    with pytest.raises(ConfigError):
        ser.params_from_text("D = 2\nZ = 1\nA = 1\nz = 0\na = 0\nc = 1\n")
    with pytest.raises(ConfigError):
        ser.parse_number("1,2,3")


def test_comments_and_blank_lines():
    kv = ser.parse_key_values("# header\n\nD = 1   # trailing\n")
    assert kv == {"D": "1"}


def test_atomic_write(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    ser.atomic_write(p, "hello\n")
    assert p.read_text() == "hello\n"
    assert [x.name for x in p.parent.iterdir()] == ["f.txt"]
