#!/usr/bin/env python3
"""Scalar model values evaluated by direct arithmetic; writes frozen/model_values.inc."""
import math
import pathlib


def mmse(d_max, q):
    return 1.0 / (1.0 / d_max + q)


def iid_rate(n, m, d_max, ts_max, zeta, eta, q, d, ts):
    b = n / m
    dm = mmse(d_max, q)
    f1 = max(math.log2((d_max - dm) / (d - dm)), 0.0)
    f2 = zeta * max((b * ts / ts_max) ** (-1.0 / eta), 1.0)
    return (n / b) * f1 * f2


def markov_rate(n, m, d_max, zeta, nu, q, d, ts):
    b = n / m
    val = math.log2(zeta * d_max / d) + math.log2(1.0 - q * q) * (ts - nu / b) / ts
    return (n / b) * max(val, 0.0)


def markov_bound(n, m, d_max, zeta, nu, q, ts):
    b = n / m
    return zeta * d_max * (1.0 - q * q) ** ((ts - nu / b) / ts)


def channel(n, h, tt):
    return n * math.log2(1.0 + h * tt)


def analog(n, m, tt, q, h, d_max):
    b = n / m
    if b >= 1.0:
        return 1.0 / (b * tt * q * h / (b * tt * q + q + 1.0) + 1.0 / d_max)
    return b / (tt * q * h / (tt * q + q + 1.0) + 1.0 / d_max) + (1.0 - b) * d_max


VALUES = {
    "kIidMmse": mmse(1.0, 1.0),
    "kIidRate": iid_rate(100, 100, 1.0, 1.0, 1.0, 1.5, 1.0, 0.75, 0.25),
    "kMarkovRate": markov_rate(64, 64, 1.0, 1.0, 0.1, 0.5, 0.5, 0.2),
    "kMarkovBoundTs011": markov_bound(100, 100, 1.0, 1.0, 0.1, 0.5, 0.11),
    "kMarkovBoundTs02": markov_bound(100, 100, 1.0, 1.0, 0.1, 0.5, 0.2),
    "kChannelRate": channel(100, 7.0, 0.5),
    "kAnalogMmse": analog(100, 100, 1.0, 1.0, 3.0, 1.0),
}


def main():
    out = pathlib.Path(__file__).parent / "frozen" / "model_values.inc"
    lines = ["// Generated by tests/oracles/model_oracle.py; do not edit."]
    for k, v in VALUES.items():
        lines.append(f"inline constexpr double {k} = {v!r};")
    out.write_text("\n".join(lines) + "\n")
    for k, v in VALUES.items():
        print(f"{k} = {v!r}")


if __name__ == "__main__":
    main()
