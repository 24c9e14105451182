"""Smoke test for the ipmdro_py extension.

Build and install first:  pip install --no-build-isolation crates/python
Run:                      python python/smoke_test.py   (or pytest python/)
"""

import json
import math
import pathlib
import tempfile

import ipmdro_py as m

UNIFORM = [1 / 3, 1 / 3, 1 / 3]


def test_three_point_worst_case():
    value, q = m.worst_case(UNIFORM, [0, 1, 2], 0.3)
    assert abs(value - 1.3) < 1e-9
    assert abs(sum(q) - 1) < 1e-12
    assert abs(m.worst_case(UNIFORM, [0, 1, 2], 1.0)[0] - 11 / 6) < 1e-9


def test_identity_and_distance():
    r = m.verify_identity(UNIFORM, [0, 1, 2], 0.3)
    assert r["residual"] <= 1e-6 and r["exact"]
    assert abs(m.lambda_penalty(UNIFORM, [0, 1, 2], 0.3) - 0.3) < 1e-9
    d = m.ipm_distance([0, 0, 1], [1, 0, 0], cls="lipschitz", coordinates=[0, 1, 2])
    assert abs(d - 2) < 1e-9


def test_fisher_centered_is_std():
    mu = [0.2, 0.3, 0.5]
    h = [1.0, -2.0, 0.5]
    mean = sum(a * b for a, b in zip(mu, h))
    std = math.sqrt(sum(a * (b - mean) ** 2 for a, b in zip(mu, h)))
    _, value = m.centered_theta(h, cls="fisher", mu=mu)
    assert abs(value - std) < 1e-9


def test_errors_raise():
    try:
        m.worst_case([0.5, 0.6], [0, 1], 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("unnormalised weights accepted")


def test_cli_runs():
    with tempfile.TemporaryDirectory() as d:
        assert m.run_cli(["repro-sin", "--out", d]) == 0
        report = json.loads(pathlib.Path(d, "repro-sin.json").read_text())
        row = report["rows"][0]
        assert 2.95 <= row["eps_lip"] <= 3.0
        assert row["lambda_lp"] <= 2.001


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
