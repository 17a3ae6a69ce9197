"""Published error/order tables used by the reproduce command.

Every cell stores the published l-infinity or l1 error and, where printed,
the observed order. Comparison policies are per column:

- tight10 / tight15 / tight30: computed error within that relative distance
  of the published value (two-sided, so being several times better than the
  reference also fails: it would mean a different scheme). tight10 widens to
  30% for sub-1e-9 cells, whose last digits depend on summation order.
- machine: the published cell sits at rounding level; the computed error
  must be at most 1e-12 and the published magnitude is not compared.
- loose: upper bound of 3x the published error. Used for columns whose
  exact values are implementation-path sensitive (ENO stencil tie-breaks on
  the second eikonal benchmark, the nonconvex-Hamiltonian columns, and the
  corner-rarefaction benchmark) while the tight reproduction of those
  behaviors is covered by the acceptance checks on orders and regions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

TABLE_NS = (64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class TableSection:
    norm: str
    region: Optional[str]
    columns: dict
    policies: dict


@dataclass(frozen=True)
class ReferenceTable:
    key: str
    title: str
    problem: str
    Ns: tuple
    sections: tuple


def cell_ok(policy: str, published: float, computed: float) -> bool:
    if policy == "machine":
        return computed <= 1e-12
    if policy == "loose":
        return computed <= 3.0 * published
    rel = {"tight10": 0.10, "tight15": 0.15, "tight30": 0.30}[policy]
    if policy == "tight10" and published < 1e-9:
        rel = 0.30
    return abs(computed - published) <= rel * published


def _section(norm, region, columns, default_policy, overrides=None):
    policies = {label: default_policy for label in columns}
    if overrides:
        policies.update(overrides)
    return TableSection(norm=norm, region=region, columns=columns, policies=policies)


REFERENCE = {
    "t1": ReferenceTable(
        key="t1",
        title="eikonal benchmark 1, l-infinity errors",
        problem="1d/ex1",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (4.465e-02, None),
                        (2.223e-02, 0.99),
                        (1.109e-02, 1.00),
                        (5.538e-03, 1.00),
                        (2.767e-03, 1.00),
                    ),
                    "filtered:upwind2": (
                        (1.141e-03, None),
                        (2.908e-04, 1.95),
                        (7.337e-05, 1.98),
                        (1.842e-05, 1.99),
                        (4.615e-06, 1.99),
                    ),
                    "filtered:upwind3": (
                        (8.532e-05, None),
                        (1.076e-05, 2.95),
                        (1.348e-06, 2.98),
                        (1.687e-07, 2.99),
                        (2.109e-08, 3.00),
                    ),
                    "filtered:upwind4": (
                        (2.646e-06, None),
                        (1.700e-07, 3.92),
                        (1.074e-08, 3.96),
                        (6.745e-10, 3.98),
                        (4.224e-11, 3.99),
                    ),
                    "filtered:centered2": (
                        (6.553e-04, None),
                        (1.559e-04, 2.05),
                        (3.789e-05, 2.03),
                        (9.451e-06, 2.00),
                        (2.317e-06, 2.03),
                    ),
                    "filtered:eno2": (
                        (7.660e-04, None),
                        (1.918e-04, 1.97),
                        (4.803e-05, 1.99),
                        (1.201e-05, 1.99),
                        (3.004e-06, 2.00),
                    ),
                    "filtered:eno3": (
                        (2.780e-05, None),
                        (3.546e-06, 2.94),
                        (4.470e-07, 2.97),
                        (5.608e-08, 2.99),
                        (7.022e-09, 2.99),
                    ),
                    "filtered:eno4": (
                        (5.561e-07, None),
                        (3.544e-08, 3.93),
                        (2.236e-09, 3.96),
                        (1.404e-10, 3.98),
                        (8.776e-12, 3.99),
                    ),
                },
                "tight10",
            ),
        ),
    ),
    "t2": ReferenceTable(
        key="t2",
        title="eikonal benchmark 2, l-infinity errors",
        problem="1d/ex2",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (1.997e-01, None),
                        (9.984e-02, 0.99),
                        (4.992e-02, 0.99),
                        (2.496e-02, 1.00),
                        (1.248e-02, 1.00),
                    ),
                    "filtered:upwind2": (
                        (8.011e-03, None),
                        (2.042e-03, 1.95),
                        (5.153e-04, 1.98),
                        (1.294e-04, 1.99),
                        (3.242e-05, 1.99),
                    ),
                    "filtered:upwind3": (
                        (3.642e-04, None),
                        (4.716e-05, 2.92),
                        (5.995e-06, 2.96),
                        (7.555e-07, 2.98),
                        (9.482e-08, 2.99),
                    ),
                    "filtered:upwind4": (
                        (1.766e-05, None),
                        (1.162e-06, 3.88),
                        (7.441e-08, 3.94),
                        (4.706e-09, 3.97),
                        (2.959e-10, 3.99),
                    ),
                    "filtered:centered2": (
                        (6.358e-03, None),
                        (1.570e-03, 2.00),
                        (3.859e-04, 2.01),
                        (9.700e-05, 1.99),
                        (2.410e-05, 2.01),
                    ),
                    "filtered:eno2": (
                        (3.983e-03, None),
                        (1.018e-03, 1.95),
                        (2.573e-04, 1.97),
                        (6.466e-05, 1.99),
                        (1.621e-05, 1.99),
                    ),
                    "filtered:eno3": (
                        (1.705e-03, None),
                        (2.764e-04, 2.60),
                        (4.899e-05, 2.48),
                        (8.981e-06, 2.44),
                        (1.422e-06, 2.66),
                    ),
                    "filtered:eno4": (
                        (1.492e-03, None),
                        (1.823e-03, -0.29),
                        (2.499e-04, 2.85),
                        (5.037e-05, 2.30),
                        (4.332e-05, 0.22),
                    ),
                },
                "tight10",
                overrides={"filtered:eno3": "loose", "filtered:eno4": "loose"},
            ),
        ),
    ),
    "t3": ReferenceTable(
        key="t3",
        title="eikonal benchmark 3, l-infinity errors",
        problem="1d/ex3",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (1.368e-02, None),
                        (6.756e-03, 1.01),
                        (3.417e-03, 0.98),
                        (1.703e-03, 1.00),
                        (8.521e-04, 1.00),
                    ),
                    "filtered:upwind2": (
                        (3.079e-04, None),
                        (7.860e-05, 1.95),
                        (1.960e-05, 1.99),
                        (4.924e-06, 1.99),
                        (1.232e-06, 2.00),
                    ),
                    "filtered:upwind3": (
                        (1.332e-15, None),
                        (1.110e-15, 0.26),
                        (2.220e-15, -0.99),
                        (2.887e-15, -0.38),
                        (5.107e-15, -0.82),
                    ),
                    "filtered:upwind4": (
                        (2.887e-15, None),
                        (3.109e-15, -0.11),
                        (4.219e-15, -0.44),
                        (2.665e-15, 0.66),
                        (4.663e-15, -0.81),
                    ),
                    "filtered:centered2": (
                        (6.357e-04, None),
                        (1.596e-04, 1.97),
                        (3.950e-05, 2.00),
                        (9.886e-06, 1.99),
                        (2.192e-06, 2.17),
                    ),
                    "filtered:eno2": (
                        (3.079e-04, None),
                        (7.860e-05, 1.95),
                        (1.960e-05, 1.99),
                        (4.924e-06, 1.99),
                        (1.232e-06, 2.00),
                    ),
                    "filtered:eno3": (
                        (2.442e-15, None),
                        (7.550e-15, -1.61),
                        (2.109e-14, -1.47),
                        (3.220e-14, -0.61),
                        (5.818e-14, -0.85),
                    ),
                    "filtered:eno4": (
                        (1.332e-15, None),
                        (4.441e-15, -1.72),
                        (3.819e-14, -3.09),
                        (1.134e-13, -1.57),
                        (8.527e-14, 0.41),
                    ),
                },
                "tight10",
                overrides={
                    "filtered:upwind3": "machine",
                    "filtered:upwind4": "machine",
                    "filtered:eno3": "machine",
                    "filtered:eno4": "machine",
                },
            ),
        ),
    ),
    "t4": ReferenceTable(
        key="t4",
        title="HJ benchmark with H(p) = p^2, l-infinity errors",
        problem="1d/ex4",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (1.234e-01, None),
                        (6.106e-02, 1.00),
                        (3.037e-02, 1.00),
                        (1.515e-02, 1.00),
                        (7.563e-03, 1.00),
                    ),
                    "filtered:centered2": (
                        (8.532e-02, None),
                        (4.226e-02, 1.00),
                        (2.108e-02, 1.00),
                        (1.054e-02, 1.00),
                        (5.310e-03, 0.99),
                    ),
                    "filtered:upwind2": (
                        (9.307e-02, None),
                        (4.179e-02, 1.14),
                        (2.095e-02, 0.99),
                        (1.044e-02, 1.00),
                        (5.304e-03, 0.98),
                    ),
                    "filtered:eno2": (
                        (8.308e-02, None),
                        (4.132e-02, 1.00),
                        (2.067e-02, 0.99),
                        (1.057e-02, 0.97),
                        (5.272e-03, 1.00),
                    ),
                },
                "tight15",
            ),
        ),
    ),
    "t5": ReferenceTable(
        key="t5",
        title="HJ benchmark with H(p) = cos(p)^2 + |p|, l-infinity errors",
        problem="1d/ex5",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (1.328e-01, None),
                        (1.095e-01, 0.27),
                        (8.855e-02, 0.31),
                        (7.043e-02, 0.33),
                        (5.401e-02, 0.38),
                    ),
                    "filtered:centered2": (
                        (2.105e-02, None),
                        (1.111e-02, 0.91),
                        (4.365e-03, 1.34),
                        (2.360e-03, 0.88),
                        (2.693e-03, -0.19),
                    ),
                    "filtered:upwind2": (
                        (1.129e-01, None),
                        (3.446e-02, 1.69),
                        (1.379e-02, 1.31),
                        (3.772e-03, 1.86),
                        (1.870e-03, 1.01),
                    ),
                    "filtered:eno2": (
                        (8.577e-02, None),
                        (6.995e-02, 0.29),
                        (5.072e-02, 0.46),
                        (1.288e-02, 1.97),
                        (8.170e-03, 0.66),
                    ),
                },
                "tight30",
                overrides={
                    "filtered:centered2": "loose",
                    "filtered:upwind2": "loose",
                    "filtered:eno2": "loose",
                },
            ),
        ),
    ),
    "t6": ReferenceTable(
        key="t6",
        title="2D eikonal benchmark 1 (circle), l-infinity errors",
        problem="2d/ex1",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (2.167e-02, None),
                        (1.126e-02, 0.93),
                        (5.661e-03, 0.99),
                        (2.854e-03, 0.99),
                        (1.432e-03, 0.99),
                    ),
                    "filtered:centered2": (
                        (9.034e-04, None),
                        (2.368e-04, 1.91),
                        (5.964e-05, 1.98),
                        (1.516e-05, 1.97),
                        (3.893e-06, 1.96),
                    ),
                    "filtered:upwind2": (
                        (1.107e-03, None),
                        (3.030e-04, 1.85),
                        (7.627e-05, 1.98),
                        (1.949e-05, 1.96),
                        (4.903e-06, 1.99),
                    ),
                    "filtered:eno2": (
                        (5.284e-04, None),
                        (1.476e-04, 1.82),
                        (3.766e-05, 1.96),
                        (9.682e-06, 1.95),
                        (2.444e-06, 1.98),
                    ),
                },
                "tight15",
            ),
        ),
    ),
    "t7": ReferenceTable(
        key="t7",
        title="2D eikonal benchmark 2 (two points), l-infinity and l1 errors",
        problem="2d/ex2",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (5.128e-02, None),
                        (2.663e-02, 0.93),
                        (1.326e-02, 1.00),
                        (6.640e-03, 1.00),
                        (3.324e-03, 1.00),
                    ),
                    "filtered:centered2": (
                        (1.643e-02, None),
                        (1.016e-02, 0.69),
                        (5.485e-03, 0.88),
                        (3.019e-03, 0.86),
                        (1.483e-03, 1.02),
                    ),
                    "filtered:upwind2": (
                        (1.276e-02, None),
                        (9.837e-03, 0.37),
                        (5.121e-03, 0.94),
                        (2.600e-03, 0.98),
                        (1.425e-03, 0.87),
                    ),
                    "filtered:eno2": (
                        (1.297e-02, None),
                        (9.514e-03, 0.44),
                        (4.795e-03, 0.98),
                        (2.402e-03, 0.99),
                        (1.490e-03, 0.69),
                    ),
                },
                "tight15",
                overrides={
                    "filtered:centered2": "tight30",
                    "filtered:upwind2": "tight30",
                    "filtered:eno2": "tight30",
                },
            ),
            _section(
                "l1",
                None,
                {
                    "monotone": (
                        (4.310e-01, None),
                        (2.202e-01, 0.96),
                        (1.088e-01, 1.01),
                        (5.420e-02, 1.00),
                        (2.706e-02, 1.00),
                    ),
                    "filtered:centered2": (
                        (4.355e-02, None),
                        (1.331e-02, 1.69),
                        (2.893e-03, 2.19),
                        (9.942e-04, 1.54),
                        (2.697e-04, 1.88),
                    ),
                    "filtered:upwind2": (
                        (7.111e-02, None),
                        (1.967e-02, 1.83),
                        (4.844e-03, 2.01),
                        (1.233e-03, 1.97),
                        (3.149e-04, 1.97),
                    ),
                    "filtered:eno2": (
                        (3.589e-02, None),
                        (1.002e-02, 1.82),
                        (2.538e-03, 1.97),
                        (6.506e-04, 1.96),
                        (1.697e-04, 1.94),
                    ),
                },
                "tight15",
                overrides={
                    "filtered:centered2": "tight30",
                    "filtered:upwind2": "tight30",
                    "filtered:eno2": "tight30",
                },
            ),
        ),
    ),
    "t8": ReferenceTable(
        key="t8",
        title="2D eikonal benchmark 3 (semicircle with segment), l-infinity errors",
        problem="2d/ex3",
        Ns=TABLE_NS,
        sections=(
            _section(
                "linf",
                None,
                {
                    "monotone": (
                        (5.771e-02, None),
                        (3.541e-02, 0.70),
                        (2.117e-02, 0.74),
                        (1.238e-02, 0.77),
                        (7.112e-03, 0.80),
                    ),
                    "filtered:centered2": (
                        (9.083e-03, None),
                        (4.833e-03, 0.90),
                        (2.399e-03, 1.00),
                        (1.470e-03, 0.70),
                        (1.024e-03, 0.52),
                    ),
                    "filtered:upwind2": (
                        (9.342e-03, None),
                        (5.508e-03, 0.75),
                        (3.344e-03, 0.72),
                        (2.523e-03, 0.41),
                        (1.517e-03, 0.73),
                    ),
                    "filtered:eno2": (
                        (8.811e-03, None),
                        (4.566e-03, 0.94),
                        (2.605e-03, 0.81),
                        (1.574e-03, 0.72),
                        (1.055e-03, 0.58),
                    ),
                },
                "tight15",
                overrides={
                    "filtered:centered2": "loose",
                    "filtered:upwind2": "loose",
                    "filtered:eno2": "loose",
                },
            ),
        ),
    ),
}
