"""Experiment kinds: parameter schemas, per-rung pipelines and ladder summaries.

A rung function returns ``{table_name: [row, ...]}``; a summary function sees
all rung outputs in ladder order and returns ``(verdicts, extra_tables)``.
Rung functions are top level so a process pool can pickle them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .. import tolerances
from ..eigenbasis import (
    EigenSystemSpec,
    abel_bound,
    diagonal_operator,
    dual_doubling_drift,
    dual_family,
    example_noest_system,
    helson_szego_family,
    partial_sum_norms,
)
from ..linalg import FourierVector, spectral_norm
from ..model_space import (
    boundary_values,
    build_TXY,
    clark_inner,
    clark_unitary,
    dirac_atoms,
    dirac_example_pair,
    distance_to_one,
    lipschitz_phi0_bound,
    mass_ratios,
    model_space_basis,
    multiplier_check,
    multiplier_phi0,
    reproducing_kernel,
    reweighted,
    spread_atoms,
    sup_on_circle,
)
from ..probe import classify_c_class, power_bound, relative_variation, verdict_from_curve
from ..weighted_shift import (
    Weight,
    block_gram_components,
    eigenvector_residual_grid,
    inverse_compression_eigenvector,
    invertibility_index,
    quasianalytic_classifier,
    quasianalytic_partial_sums,
    weighted_shift,
)
from .config import SchemaError

Rows = dict[str, list[dict[str, Any]]]


@dataclass
class Param:
    name: str
    kind: type | str  # float | int | str | "intlist"
    default: Any = None
    check: Callable[[Any], str | None] | None = None

    def parse(self, raw: dict[str, str]) -> Any:
        if self.name not in raw:
            if self.default is None:
                raise SchemaError(self.name, "required parameter missing")
            value = self.default
        else:
            text = raw[self.name].strip()
            try:
                if self.kind == "intlist":
                    value = [int(t) for t in text.split(",") if t.strip()]
                else:
                    value = self.kind(text)
            except ValueError as exc:
                raise SchemaError(self.name, f"cannot parse {text!r}") from exc
        if self.check is not None:
            msg = self.check(value)
            if msg:
                raise SchemaError(self.name, msg)
        return value


@dataclass
class Kind:
    name: str
    params: list[Param]
    columns: dict[str, list[tuple[str, str]]]
    rung: Callable[[dict, int], Rows]
    summarize: Callable[[dict, list[int], list[Rows]], tuple[dict, Rows]]
    min_rungs: int = 1
    ladder_check: Callable[[dict, list[int]], str | None] | None = None
    summary_columns: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def validate(self, raw: dict[str, str], ladder: list[int]) -> dict[str, Any]:
        known = {p.name for p in self.params}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise SchemaError(unknown[0], f"unknown parameter for kind {self.name}")
        values = {p.name: p.parse(raw) for p in self.params}
        if len(ladder) < self.min_rungs:
            raise SchemaError("ladder", f"kind {self.name} needs at least {self.min_rungs} rungs")
        if self.ladder_check is not None:
            msg = self.ladder_check(values, ladder)
            if msg:
                raise SchemaError("ladder", msg)
        return values


def _in_open(lo, hi):
    return lambda x: None if lo < x < hi else f"must lie in ({lo}, {hi})"


def _positive(x):
    return None if x > 0 else "must be positive"


# helson-szego-ladder


def hs_rung(p: dict, N: int) -> Rows:
    fam = helson_szego_family(p["alpha"], N, 2 * N + p["headroom"])
    system = dual_family(fam)
    pn = partial_sum_norms(system)
    spec = EigenSystemSpec.default_angles(N)
    T = diagonal_operator(spec, system)
    B = system.B
    s = np.linalg.svd(B / np.linalg.norm(B, axis=0), compute_uv=False)
    sup_p = float(pn.max())
    row = {
        "N": N,
        "sup_P": sup_p,
        "riesz_lower": float(s[-1]),
        "riesz_upper": float(s[0]),
        "T_norm": spectral_norm(T),
        "bound": (2 * np.pi + 1) * sup_p,
        "abel_sum_bound": abel_bound(spec, pn),
        "biorthogonality": system.biorthogonality_residual,
        "dual_drift": dual_doubling_drift(p["alpha"], N, 2 * N + p["headroom"]),
    }
    return {"ladder": [row], "partial_sums": [{"N": N, "n": n, "P_norm": float(v)} for n, v in enumerate(pn)]}


def hs_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    rows = [r["ladder"][0] for r in rungs]
    verdict = verdict_from_curve([(r["N"], r["riesz_lower"]) for r in rows])
    upper = [r["riesz_upper"] for r in rows]
    return {
        "asymptote": verdict.kind,
        "lower_trend_exponent": verdict.trend_exponent,
        "upper_trend_exponent": float(np.polyfit(np.log(ladder), np.log(upper), 1)[0]),
        "norm_bound_holds": all(r["T_norm"] <= r["bound"] + 1e-6 for r in rows),
        "dual_drift_max": max(r["dual_drift"] for r in rows),
    }, {}


# example-noest


def noest_sequences(N: int, c_power: float) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(N, dtype=float)
    c = (n + 1) ** c_power
    odd = 2 * np.pi / (n + 2)
    angles = np.empty(2 * N)
    angles[0::2] = odd + 1 / ((n + 1) * c)
    angles[1::2] = odd
    return c, angles


def noest_rung(p: dict, M: int) -> Rows:
    c, angles = noest_sequences(M, p["c_power"])
    ne = example_noest_system(c, angles, M)
    q = [x.norm() * xd.norm() for x, xd in zip(ne.system.primal, ne.system.dual)]
    row = {
        "M": M,
        "sup_Q": float(max(q)),
        "closed_form_Q_error": float(np.max(np.abs(np.array(q[0::2]) - np.sqrt(1 + c**2)))),
        "off_diagonal": ne.off_diagonal_norm(),
        "coupling_sup": ne.coupling_sup,
        "power_bound": power_bound(ne.T, p["power_steps"]),
        "T_norm": spectral_norm(ne.T),
    }
    return {"ladder": [row]}


def noest_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    rows = [r["ladder"][0] for r in rungs]
    var = relative_variation([r["power_bound"] for r in rows])
    return {
        "power_bound_variation": var,
        "power_bound_trend": "bounded-trend" if var < 0.05 else "growing-trend",
        "off_diagonal_within_coupling": all(r["off_diagonal"] <= r["coupling_sup"] + 1e-8 for r in rows),
    }, {}


# model-space-pair


def _pair(p: dict):
    rng = np.random.default_rng(p["seed"])
    sigma_v = spread_atoms(p["atoms"], rng)
    h = rng.uniform(p["h_low"], p["h_high"], p["atoms"])
    sigma_u = reweighted(sigma_v, h)
    return sigma_u, sigma_v, clark_inner(sigma_u), clark_inner(sigma_v)


def model_rung(p: dict, D: int) -> Rows:
    sigma_u, sigma_v, u, v = _pair(p)
    rep_u, rep_v = model_space_basis(u, D), model_space_basis(v, D)
    V = clark_unitary(rep_u, sigma_u).entries
    unitarity = float(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))))
    Q = rep_u.Q
    repro = 0.0
    for z in sigma_u.zetas:
        k = reproducing_kernel(u, z, D).coeffs
        direct = np.polynomial.polynomial.polyval(z, Q)
        repro = max(repro, float(np.max(np.abs(Q.T @ k.conj() - direct))))
    phi = multiplier_phi0(u, v)
    mult = multiplier_check(phi, rep_u, rep_v)
    txy = build_TXY(u, v, phi, D)
    sx = np.linalg.svd(txy.X.entries, compute_uv=False)
    sy = np.linalg.svd(txy.Y.entries, compute_uv=False)
    row = {
        "D": D,
        "unitarity": unitarity,
        "reproducing": repro,
        "YS_TY": txy.residuals["YS-TY"],
        "XT_SX": txy.residuals["XT-SX"],
        "XY_phi0S": txy.residuals["XY-phi0(S)"],
        "defect_rank": txy.defect_rank,
        "c_variance": txy.c_variance,
        "multiplier_residual": mult.containment_residual,
        "multiplier_sigma_min": mult.smallest,
        "X_sigma_min": float(sx[-1]),
        "Y_sigma_min": float(sy[-1]),
    }
    boundary = boundary_values(rep_u, V[:, 0], sigma_u.zetas)
    row["round_trip"] = float(np.max(np.abs(boundary - np.eye(len(sigma_u))[0] / np.sqrt(sigma_u.masses[0]))))
    return {"ladder": [row]}


def model_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    rows = [r["ladder"][0] for r in rungs]
    tol = tolerances.get("intertwining")
    sigma_u, sigma_v, u, v = _pair(p)
    ratios = np.sort(np.sqrt(mass_ratios(u, v)))
    return {
        "intertwining_holds": all(max(r["YS_TY"], r["XT_SX"], r["XY_phi0S"]) < tol for r in rows),
        "multiplier_full_rank": all(r["multiplier_sigma_min"] > 1e-6 for r in rows),
        "rank_one_defect": all(r["defect_rank"] == 1 for r in rows),
        "expected_multiplier_singular_values": ratios.tolist(),
    }, {}


def _model_ladder(p, ladder):
    need = 2 * p["atoms"] + 16
    return None if ladder[0] >= need else f"window D must be at least {need} for {p['atoms']} atoms"


# weighted-shift-suite


def _weights(p: dict, M: int) -> tuple[Weight, Weight]:
    return Weight.exponential(p["beta"], M), Weight.stretched(p["alpha"], M)


def shift_rung(p: dict, M: int) -> Rows:
    w0, w = _weights(p, M)
    probes = [FourierVector.unit(w.window, k) for k in range(-2, 3)]
    n_max = 3 * M // 4
    grid = eigenvector_residual_grid(w, p["grid_radius"], 0.05)
    row = {
        "M": M,
        "norm_S_omega": spectral_norm(weighted_shift(w)),
        "norm_S_omega0": spectral_norm(weighted_shift(w0)),
        "invertibility_index": invertibility_index(w),
        "class_omega": classify_c_class(weighted_shift(w), probes, n_max).pattern,
        "class_omega0": classify_c_class(weighted_shift(w0), probes, n_max).pattern,
        "eigen_residual": inverse_compression_eigenvector(w, p["zeta"])[1],
        "grid_max_residual": float(grid[:, 2].max()),
    }
    return {"ladder": [row]}


def shift_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    w0, w = _weights(p, ladder[0])
    v0 = quasianalytic_classifier(w0, p["sum_ladder"])
    v1 = quasianalytic_classifier(w, p["sum_ladder"])
    s0 = quasianalytic_partial_sums(w0, p["sum_ladder"][-1])
    s1 = quasianalytic_partial_sums(w, p["sum_ladder"][-1])
    table = [{"n": n, "sum_omega0": float(s0[n - 1]), "sum_omega": float(s1[n - 1])} for n in p["sum_ladder"]]
    rows = [r["ladder"][0] for r in rungs]
    residuals = [r["grid_max_residual"] for r in rows]
    return {
        "verdict_omega0": v0.verdict,
        "verdict_omega": v1.verdict,
        "tail_estimate_omega": v1.tail_estimate,
        "growth_slope_omega0": v0.growth_slope,
        "growth_slope_omega": v1.growth_slope,
        "classes": sorted({r["class_omega"] for r in rows} | {r["class_omega0"] for r in rows}),
        "grid_residual_decreasing": all(b < a for a, b in zip(residuals, residuals[1:])),
    }, {"partial_sums": table}


# block-gram


def block_rung(p: dict, M: int) -> Rows:
    w0, w = _weights(p, M)
    probes = [FourierVector.unit(w0.window, 0), FourierVector.unit(w0.window, -1)]
    r = block_gram_components(w0, w, p["c"], probes, ladder=p["sum_ladder"])
    row = {
        "M": M,
        "component_a": r.component_a_residual,
        "component_b": r.component_b_residual,
        "x0_sigma_min": r.x0_smallest_singular,
        "max_power": r.iterations,
    }
    return {"ladder": [row]}


def block_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    rows = [r["ladder"][0] for r in rungs]
    tol = tolerances.get("gram_limit")
    return {
        "component_a_holds": all(r["component_a"] < tol for r in rows),
        "component_b_holds": all(r["component_b"] < tol for r in rows),
        "x0_sigma_min_variation": relative_variation([r["x0_sigma_min"] for r in rows]),
    }, {}


# dirac-example


def dirac_rung(p: dict, N: int) -> Rows:
    zetas, masses = dirac_atoms(N)
    sigma_v, sigma_u = dirac_example_pair(distance_to_one, zetas, masses)
    u, v = clark_inner(sigma_u), clark_inner(sigma_v)
    phi = multiplier_phi0(u, v)
    row = {
        "N": N,
        "divergence_sum": float(np.sum(masses / distance_to_one(zetas))),
        "phi0_sup": sup_on_circle(phi, p["samples"]),
        "lipschitz_bound": lipschitz_phi0_bound(distance_to_one, sigma_v),
        "min_mass_ratio": float(np.min(mass_ratios(u, v))),
    }
    return {"ladder": [row]}


def dirac_summary(p: dict, ladder: list[int], rungs: list[Rows]) -> tuple[dict, Rows]:
    rows = [r["ladder"][0] for r in rungs]
    return {
        "phi0_within_bound": all(r["phi0_sup"] <= r["lipschitz_bound"] for r in rows),
        "divergence_increasing": all(b["divergence_sum"] > a["divergence_sum"] for a, b in zip(rows, rows[1:])),
    }, {}


_SUM_LADDER = Param("sum_ladder", "intlist", [10, 100, 1000, 10000],
                    lambda x: None if len(x) >= 3 and all(b > a > 0 for a, b in zip(x, x[1:])) else "need 3 increasing rungs")

KINDS: dict[str, Kind] = {
    k.name: k
    for k in [
        Kind(
            "helson-szego-ladder",
            [Param("alpha", float, None, lambda a: None if -0.5 < a < 0.5 and a != 0 else "must lie in (-1/2, 0) or (0, 1/2)"),
             Param("headroom", int, 64, _positive)],
            {
                "ladder": [("N", "dim"), ("sup_P", "1"), ("riesz_lower", "1"), ("riesz_upper", "1"), ("T_norm", "1"),
                           ("bound", "1"), ("abel_sum_bound", "1"), ("biorthogonality", "abs"), ("dual_drift", "abs")],
                "partial_sums": [("N", "dim"), ("n", "index"), ("P_norm", "1")],
            },
            hs_rung, hs_summary, min_rungs=3,
            ladder_check=lambda p, lad: None if lad[0] >= 4 else "N must be at least 4",
        ),
        Kind(
            "example-noest",
            [Param("c_power", float, 0.5, _in_open(0, 2)), Param("power_steps", int, 64, _positive)],
            {"ladder": [("M", "pairs"), ("sup_Q", "1"), ("closed_form_Q_error", "abs"), ("off_diagonal", "1"),
                        ("coupling_sup", "1"), ("power_bound", "1"), ("T_norm", "1")]},
            noest_rung, noest_summary,
            ladder_check=lambda p, lad: None if lad[0] >= 2 else "need at least 2 pairs",
        ),
        Kind(
            "model-space-pair",
            [Param("atoms", int, 3, lambda n: None if 1 <= n <= 12 else "must lie in 1..12"),
             Param("seed", int, 0), Param("h_low", float, 0.5, _positive), Param("h_high", float, 2.0, _positive)],
            {"ladder": [("D", "degree"), ("unitarity", "abs"), ("reproducing", "abs"), ("YS_TY", "abs"),
                        ("XT_SX", "abs"), ("XY_phi0S", "abs"), ("defect_rank", "count"), ("c_variance", "abs"),
                        ("multiplier_residual", "abs"), ("multiplier_sigma_min", "1"), ("X_sigma_min", "1"),
                        ("Y_sigma_min", "1"), ("round_trip", "abs")]},
            model_rung, model_summary, ladder_check=_model_ladder,
        ),
        Kind(
            "weighted-shift-suite",
            [Param("beta", float, 1.0, _positive), Param("alpha", float, 0.5, lambda a: None if 0 < a < 1 else "must lie in (0, 1)"),
             Param("zeta", float, 0.5, lambda z: None if abs(z) < 1 else "need |zeta| < 1"),
             Param("grid_radius", float, 0.8, _in_open(0, 1)), _SUM_LADDER],
            {"ladder": [("M", "half-width"), ("norm_S_omega", "1"), ("norm_S_omega0", "1"), ("invertibility_index", "1"),
                        ("class_omega", "label"), ("class_omega0", "label"), ("eigen_residual", "abs"),
                        ("grid_max_residual", "abs")]},
            shift_rung, shift_summary,
            ladder_check=lambda p, lad: None if lad[0] >= 8 else "M must be at least 8",
            summary_columns={"partial_sums": [("n", "terms"), ("sum_omega0", "1"), ("sum_omega", "1")]},
        ),
        Kind(
            "block-gram",
            [Param("beta", float, 1.0, _positive), Param("alpha", float, 0.5, lambda a: None if 0 < a < 1 else "must lie in (0, 1)"),
             Param("c", float, 0.5, lambda c: None if 0 < c <= 1 else "must lie in (0, 1]"), _SUM_LADDER],
            {"ladder": [("M", "half-width"), ("component_a", "abs"), ("component_b", "abs"), ("x0_sigma_min", "1"),
                        ("max_power", "steps")]},
            block_rung, block_summary,
            ladder_check=lambda p, lad: None if lad[0] >= 16 else "M must be at least 16",
        ),
        Kind(
            "dirac-example",
            [Param("samples", int, 4096, _positive)],
            {"ladder": [("N", "atoms"), ("divergence_sum", "1"), ("phi0_sup", "1"), ("lipschitz_bound", "1"),
                        ("min_mass_ratio", "1")]},
            dirac_rung, dirac_summary,
            ladder_check=lambda p, lad: None if lad[-1] <= 10 else "at most 10 atoms (coefficient conditioning)",
        ),
    ]
}
