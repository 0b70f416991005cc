"""Named verification checks grouped into suites.

Each check takes a :class:`Context` and returns a :class:`CheckResult`.
Check ids are frozen strings; renaming one is a breaking change for report
consumers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft
from numpy.polynomial.legendre import leggauss

from . import bvp_pipeline as bp
from . import commutator_engine as ce
from . import mollified_calculus as mc
from .half_space_core import (
    FullSpaceField,
    HalfSpaceField,
    HalfSpaceGrid,
    NormSpec,
    conormal_derivative,
    conormal_weight,
    natural,
    norm,
    sample_test_function,
    sharp,
    sharp_inv,
    wave_packet,
)
from .symbol_calculus import DEFAULT_SWEEP, multiplication_symbol, op_conormal, weight, weight_symbol

STATUSES = ("PASS", "FAIL", "INCONCLUSIVE")
SUITES = ("transforms", "symbols", "mollified", "commutators", "pipeline-1", "pipeline-2")
SAMPLE_FAMILIES = ("bump", "boundary", "osc", "wave")
PARSEVAL_TOL = 1e-12


class InternalInconsistency(RuntimeError):
    """An identity that holds by construction was violated."""


@dataclass
class CheckResult:
    check_id: str
    status: str
    measured: dict
    tolerances: dict
    runtime: float = 0.0
    tables: dict = field(default_factory=dict)  # name -> list of row dicts (CSV sweep tables)
    error: str | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    def to_json(self, with_runtime: bool = False) -> dict:
        out = {
            "check_id": self.check_id,
            "status": self.status,
            "measured": self.measured,
            "tolerances": self.tolerances,
        }
        if with_runtime:
            out["runtime"] = self.runtime
        return out


@dataclass
class Context:
    grid: HalfSpaceGrid
    cut: mc.CutoffSpec
    sweep: tuple = DEFAULT_SWEEP
    seed: int = 0
    families: tuple = SAMPLE_FAMILIES
    pipeline_families: tuple = bp.DEFAULT_FAMILIES
    toy: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict, repr=False)

    def tol(self, check_id: str, name: str, default: float) -> float:
        return float(self.tolerances.get(check_id, {}).get(name, default))

    def samples(self, components: int = 1, seeds: int = 1):
        key = ("samples", components, seeds)
        if key not in self.cache:
            out = []
            for fam in self.families:
                for k in range(seeds):
                    s = self.seed + k
                    u, psi = sample_test_function(fam, s, self.grid, components=components)
                    out.append((f"{fam}-{s}", u, psi))
            self.cache[key] = out
        return self.cache[key]

    def toy_problem(self) -> bp.ToyBVP:
        if "toy" not in self.cache:
            p = bp.build_toy(self.grid, **self.toy)
            rep = bp.validate_structure(p)
            if not rep.passed:
                raise ValueError(f"toy problem violates the structural assumptions: {rep.violations}")
            self.cache["toy"] = p
        return self.cache["toy"]

    def ledger(self, statement: int) -> bp.EstimateLedger:
        key = ("ledger", statement)
        if key not in self.cache:
            p = self.toy_problem()
            samples = bp.default_samples(self.grid, p, families=self.pipeline_families, seed=self.seed)
            self.cache[key] = bp.estimate_transform_demo(p, self.cut, samples, self.sweep, statement)
        return self.cache[key]


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _rel(a, b) -> float:
    den = float(np.linalg.norm(b))
    diff = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    return diff / den if den > 0 else diff


def _fkey(g) -> str:
    return repr(float(g))


# ----------------------------------------------------------------------------
# transforms


def _natural_l2(u: HalfSpaceField, nodes: int = 40, levels: int = 14) -> float:
    """L2 norm in the original half-space variables by Gauss-Legendre in x1.

    Panels are graded geometrically towards x1 = 0 so that fields living at
    small x1 are resolved.
    """
    grid = u.grid
    x, w = leggauss(nodes)
    edges = np.concatenate([[0.0], grid.delta0 * 2.0 ** -np.arange(levels, -1, -1)])
    x1 = np.concatenate([(b - a) / 2 * x + (a + b) / 2 for a, b in zip(edges, edges[1:])])
    w1 = np.concatenate([(b - a) / 2 * w for a, b in zip(edges, edges[1:])])
    xp = [ax[None, :] for ax in (grid.axis(j) for j in range(1, grid.n))]
    vals = u.generator.value(x1[:, None], np.log(x1)[:, None], xp)
    vals = np.asarray(vals).reshape(u.components, len(x1), -1)
    sq = np.sum(np.abs(vals) ** 2 * w1[None, :, None]) * grid.boundary_cell
    return float(math.sqrt(sq))


def check_sharp_identities(ctx: Context) -> CheckResult:
    cid = "sharp-transform-identities"
    tol = ctx.tol(cid, "residual", 1e-9)
    count = int(ctx.tol(cid, "fields", 100))
    grid = ctx.grid
    t, *xp = grid.mesh()
    x1 = np.exp(t)
    w = np.exp(t / 2)
    ax = tuple(range(1, grid.n + 1))
    k = grid.frequency_mesh()
    # a bounded multiplier psi(x1, x') for the product rule
    psi_fn = lambda a, b: np.cos(3 * a) / (1 + a**2) + 0.5 * np.sin(2 * b[0])  # noqa: E731
    psi_nat = natural(grid, psi_fn)
    worst = {"isometry": 0.0, "round_trip": 0.0, "product": 0.0, "natural_derivative": 0.0, "normal_conormal": 0.0, "tangential_conormal": 0.0}
    parseval = 0.0
    fams = list(ctx.families)
    for i in range(count):
        fam = fams[i % len(fams)]
        u, _ = sample_test_function(fam, ctx.seed + i // len(fams), grid)
        gen = u.generator
        v = sharp(u)
        parseval = max(parseval, v.parseval_defect())
        worst["isometry"] = max(worst["isometry"], abs(v.l2() - _natural_l2(u)) / max(v.l2(), 1e-300))
        back = sharp_inv(FullSpaceField(grid, v.data.copy()), strict=True)
        worst["round_trip"] = max(worst["round_trip"], _rel(back.sharp_data, u.sharp_data))
        vals = np.asarray(gen.value(x1, t, xp), complex)
        worst["product"] = max(worst["product"], _rel(psi_nat * v.data, psi_fn(x1, xp) * vals * w))
        spec = sfft.fftn(v.data, axes=ax)
        zc = np.asarray(gen.conormal(x1, t, xp), complex)
        z1 = zc * w
        d1 = sfft.ifftn(1j * k[0] * spec, axes=ax)
        worst["normal_conormal"] = max(worst["normal_conormal"], _rel(d1, z1 + 0.5 * v.data))
        # d_j u^natural = (Z_j u)^natural; the normal direction needs a periodic u^natural
        nat = sfft.fftn(vals, axes=ax)
        for j in range(grid.n):
            if j == 0 and np.abs(vals[:, 0]).max() > grid.tolerance * max(np.abs(vals).max(), 1e-300):
                continue
            zj = zc if j == 0 else np.asarray(gen.tangential(j - 1, x1, t, xp), complex)
            worst["natural_derivative"] = max(worst["natural_derivative"], _rel(sfft.ifftn(1j * k[j] * nat, axes=ax), zj))
        for j in range(1, grid.n):
            tj = np.asarray(gen.tangential(j - 1, x1, t, xp), complex) * w
            dj = conormal_derivative(u, j + 1).sharp_data
            worst["tangential_conormal"] = max(worst["tangential_conormal"], _rel(dj, tj))
    if parseval > PARSEVAL_TOL:
        raise InternalInconsistency(f"discrete Parseval defect {parseval:.2e}")
    measured = dict(worst, fields=count, parseval_defect=parseval)
    return CheckResult(cid, _status(max(worst.values()) <= tol), measured, {"residual": tol})


def _probe_bank(grid: HalfSpaceGrid, gamma: float):
    """Wave packets at gamma-relative sharp frequencies that the grid resolves."""
    nyq = [math.pi / h for h in grid.spacings]
    out = []
    for c in (0.5, 1.0, math.sqrt(2.0), 2.0):
        for ang in (0.0, math.pi / 4, math.pi / 2):
            xi = np.array([math.cos(ang), math.sin(ang)] + [0.0] * (grid.n - 2)) * c * gamma
            if all(abs(a) <= 0.6 * q for a, q in zip(xi, nyq)):
                out.append(wave_packet(grid, xi))
    return out


def _exact_band(grid: HalfSpaceGrid, m: int, gamma: float):
    """Best constants lo, hi with lo <= |u|_spec / |u|_deriv <= hi over all grid fields."""
    ratio = np.sqrt(
        conormal_weight(grid, NormSpec("conormal_spectral", m, gamma)) / conormal_weight(grid, NormSpec("conormal_derivative", m, gamma))
    )
    return float(ratio.min()), float(ratio.max())


def check_norm_equivalence(ctx: Context) -> CheckResult:
    cid = "norm-equivalence-band"
    drift_tol = ctx.tol(cid, "drift", 0.10)
    slack = ctx.tol(cid, "imbedding_slack", 1e-13)
    fields = [u for _, u, _ in ctx.samples()]
    bands, seen = {1: {}, 2: {}}, {1: {}, 2: {}}
    star_gap = 0.0
    contained = True
    imbedding_ok = True
    worst_imb = 0.0
    for g in ctx.sweep:
        bank = fields + _probe_bank(ctx.grid, float(g))
        for m in (1, 2):
            lo, hi = _exact_band(ctx.grid, m, float(g))
            wlo, whi = math.inf, 0.0
            for u in bank:
                a = norm(u, NormSpec("conormal_spectral", m, g))
                b = norm(u, NormSpec("conormal_derivative", m, g))
                r = a / b
                wlo, whi = min(wlo, r), max(whi, r)
                if m == 1:
                    c = norm(u, NormSpec("anisotropic", 1, g))
                    star_gap = max(star_gap, abs(c - b) / b)
            contained &= lo * (1 - 1e-12) <= wlo and whi <= hi * (1 + 1e-12)
            bands[m][g] = (lo, hi)
            seen[m][g] = (wlo, whi)
        for u in fields:
            vals = {s: norm(u, NormSpec("conormal_spectral", s, g)) for s in (-1, 0, 1, 2)}
            for s in vals:
                for r in vals:
                    if s <= r:
                        lhs, rhs = vals[s], float(g) ** (s - r) * vals[r]
                        excess = (lhs - rhs) / rhs if rhs > 0 else 0.0
                        worst_imb = max(worst_imb, excess)
                        imbedding_ok &= excess <= slack
    consts = {m: {g: max(hi, 1 / lo) for g, (lo, hi) in b.items()} for m, b in bands.items()}
    drifts = {m: mc.drift(c.values()) for m, c in consts.items()}
    measured = {
        "band": {str(m): {_fkey(g): list(v) for g, v in b.items()} for m, b in bands.items()},
        "witness_range": {str(m): {_fkey(g): list(v) for g, v in b.items()} for m, b in seen.items()},
        "band_constant": {str(m): {_fkey(g): v for g, v in c.items()} for m, c in consts.items()},
        "drift": {str(m): v for m, v in drifts.items()},
        "witnesses_inside_band": contained,
        "imbedding_max_excess": worst_imb,
        "h1_star_vs_tan_gap": star_gap,
    }
    ok = max(drifts.values()) <= drift_tol and contained and imbedding_ok and star_gap <= 1e-12
    tables = {
        "band": [
            {"order": m, "gamma": float(g), "low": lo, "high": hi, "witness_low": seen[m][g][0], "witness_high": seen[m][g][1]}
            for m, b in bands.items()
            for g, (lo, hi) in b.items()
        ]
    }
    return CheckResult(cid, _status(ok), measured, {"drift": drift_tol, "imbedding_slack": slack}, tables=tables)


# ----------------------------------------------------------------------------
# symbols


def check_two_sided_inverse(ctx: Context) -> CheckResult:
    cid = "weight-two-sided-inverse"
    tol = ctx.tol(cid, "residual", 1e-10)
    worst = {}
    for g in ctx.sweep:
        res = 0.0
        for m in (1.0, -1.0):
            a, b = weight_symbol(m, g, ctx.grid), weight_symbol(-m, g, ctx.grid)
            for _, u, _ in ctx.samples():
                res = max(res, _rel(op_conormal(op_conormal(u, b), a).sharp_data, u.sharp_data))
        worst[_fkey(g)] = res
    return CheckResult(cid, _status(max(worst.values()) <= tol), {"residual": worst}, {"residual": tol})


def check_peetre(ctx: Context) -> CheckResult:
    cid = "weight-peetre-bound"
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 4242]))
    count = 1000
    n = ctx.grid.n
    xi = rng.normal(scale=50, size=(count, n))
    eta = rng.normal(scale=50, size=(count, n))
    s = rng.uniform(-4, 4, size=count)
    g = rng.uniform(1, 64, size=count)
    lhs = weight(np.sum(xi**2, 1), s, g)
    rhs = 2 ** np.abs(s) * weight(np.sum((xi - eta) ** 2, 1), s, g) * weight(np.sum(eta**2, 1), np.abs(s), 1.0)
    worst = float(np.max(lhs / rhs))
    return CheckResult(cid, _status(worst <= 1.0), {"max_ratio": worst, "samples": count}, {"ratio": 1.0})


def check_multiplication(ctx: Context) -> CheckResult:
    cid = "multiplication-quantization"
    tol = ctx.tol(cid, "residual", 1e-12)
    grid = ctx.grid
    P = grid.periods
    th = (2 * np.pi * 2 / P[0], 2 * np.pi * 3 / P[1]) + (0.0,) * (grid.n - 2)
    c0 = np.array([[1.0, 0.2], [0.0, 0.7]])
    c1 = np.array([[0.1, 0.05j], [0.0, -0.2]])
    modes = [((0.0,) * grid.n, c0), (th, c1), (tuple(-x for x in th), c1.conj())]
    sym = multiplication_symbol(modes, grid)
    mesh = grid.mesh()
    field_vals = sum(np.exp(1j * sum(a * x for a, x in zip(t_, mesh)))[None, None] * c[:, :, None, None] for t_, c in modes)
    worst = 0.0
    for _, u, _ in ctx.samples(components=2):
        direct = np.einsum("ij...,j...->i...", field_vals, u.sharp_data)
        worst = max(worst, _rel(op_conormal(u, sym).sharp_data, direct))
    return CheckResult(cid, _status(worst <= tol), {"residual": worst}, {"residual": tol})


# ----------------------------------------------------------------------------
# mollified calculus


def check_zero_order(ctx: Context) -> CheckResult:
    cid = "zero-order-degeneracies"
    tol = ctx.tol(cid, "residual", 1e-10)
    out = {"lambda_chi_minus_one": 0.0, "remainder": 0.0, "boundary_symbol_minus_one": 0.0}
    for g in ctx.sweep:
        mw = mc.mollified_weight(0.0, float(g), ctx.cut, ctx.grid)
        out["lambda_chi_minus_one"] = max(out["lambda_chi_minus_one"], float(np.abs(mw.lamchi.table - 1).max()))
        out["remainder"] = max(out["remainder"], float(np.abs(mw.remainder.table).max()))
        bs = mc.boundary_symbol(0.0, float(g), ctx.cut, ctx.grid)
        out["boundary_symbol_minus_one"] = max(out["boundary_symbol_minus_one"], float(np.abs(bs.table - 1).max()))
    return CheckResult(cid, _status(max(out.values()) <= tol), out, {"residual": tol})


def check_decay(ctx: Context) -> CheckResult:
    cid = "smoothing-remainder-decay"
    thr = ctx.tol(cid, "slope", mc.SLOPE_THRESHOLD)
    reports = {}
    for sid, u, _ in ctx.samples():
        reports[sid] = mc.verify_smoothing_decay(u, -1.0, 2, ctx.cut, ctx.sweep)
    slopes = {k: r.slope for k, r in reports.items()}
    ok = all(r.slope is not None and r.slope <= thr for r in reports.values())
    measured = {"slopes": slopes, "ratios": {k: r.ratios for k, r in reports.items()}, "monotone": {k: {str(h): v for h, v in r.monotone.items()} for k, r in reports.items()}}
    tables = {"ratios": [{"sample_id": k, "gamma": g, "ratio": q} for k, r in reports.items() for g, q in zip(r.gammas, r.ratios)]}
    return CheckResult(cid, _status(ok), measured, {"slope": thr}, tables=tables)


def check_support(ctx: Context) -> CheckResult:
    cid = "cutoff-support-preservation"
    tol = ctx.tol(cid, "mass", mc.SUPPORT_TOL)
    neg_floor = ctx.tol(cid, "negative_control", 1e-3)
    interior, boundary = 0.0, 0.0
    for g in ctx.sweep:
        for _, u, psi in ctx.samples():
            interior = max(interior, mc.verify_support_preservation(u, -1.0, float(g), ctx.cut).outside_mass)
            boundary = max(boundary, mc.verify_boundary_support(psi, -1.0, float(g), ctx.cut).outside_mass)
    big = mc.oversized_cutoff(ctx.cut.delta0, ctx.grid.n)
    u = ctx.samples()[0][1]
    control = mc.verify_support_preservation(u, -1.0, 1.0, big).outside_mass
    measured = {"interior_outside_mass": interior, "boundary_outside_mass": boundary, "negative_control_mass": control}
    ok = interior <= tol and boundary <= tol and control > neg_floor
    return CheckResult(cid, _status(ok), measured, {"mass": tol, "negative_control": neg_floor})


def check_trace(ctx: Context) -> CheckResult:
    cid = "boundary-trace-identity"
    tol = ctx.tol(cid, "residual", 1e-6)
    floor = ctx.tol(cid, "residual_floor", 1e-9)
    res = {}
    for g in ctx.sweep:
        for sid, u, _ in ctx.samples():
            if sid.startswith("wave"):
                continue  # vanishing trace: both routes are zero
            res[(sid, float(g))] = mc.verify_trace_identity(u, -1.0, float(g), ctx.cut).residual
    vals = np.array(list(res.values()))
    med = float(np.median(np.maximum(vals, floor)))
    stable = bool(np.all(np.maximum(vals, floor) <= 2 * med))
    ok = float(vals.max()) <= tol and stable
    measured = {"max_residual": float(vals.max()), "median_residual": med, "stable": stable}
    tables = {"residuals": [{"sample_id": s, "gamma": g, "residual": r} for (s, g), r in res.items()]}
    return CheckResult(cid, _status(ok), measured, {"residual": tol, "residual_floor": floor, "stability_factor": 2.0}, tables=tables)


def check_beta(ctx: Context) -> CheckResult:
    cid = "boundary-symbol-splitting"
    drift_tol = ctx.tol(cid, "drift", 0.10)
    quad_tol = ctx.tol(cid, "taylor_agreement", 1e-8)
    rep = mc.verify_beta_splitting(-1.0, ctx.cut, ctx.grid, ctx.sweep, drift_tol)
    k = ctx.grid.wavenumbers(1)
    idx = [0, 5, 40, 120]
    agree = {}
    for g in (8.0, 64.0):
        bs = mc.boundary_symbol(-1.0, g, ctx.cut, ctx.grid)
        bt = mc.beta_taylor(-1.0, g, ctx.cut, ctx.grid, k[idx], radius=bs.truncation)
        agree[_fkey(g)] = float(np.max(np.abs(bt - bs.beta[idx])) / np.max(np.abs(bs.beta)))
    ok = rep.finite and rep.drift <= drift_tol and max(agree.values()) <= quad_tol
    measured = {
        "sup_ratio": {_fkey(g): v for g, v in rep.sup_ratio.items()},
        "drift": rep.drift,
        "finite": rep.finite,
        "taylor_agreement": agree,
    }
    tables = {"sup_ratio": [{"gamma": float(g), "sup_ratio": v} for g, v in rep.sup_ratio.items()]}
    return CheckResult(cid, _status(ok), measured, {"drift": drift_tol, "taylor_agreement": quad_tol}, tables=tables)


# ----------------------------------------------------------------------------
# commutators


def _coefficients(ctx: Context):
    return {
        "constant": ce.constant_coefficient(np.array([[2.0, 0.3], [0.3, 1.5]])),
        "three-mode": ce.default_coefficient(ctx.grid),
    }


def check_normal_commutator(ctx: Context) -> CheckResult:
    cid = "normal-commutator-identity"
    tol = ctx.tol(cid, "residual", ce.COMMUTATOR_TOL)
    gammas = [g for g in (1.0, 8.0, 64.0) if g in {float(x) for x in ctx.sweep}] or [float(ctx.sweep[0])]
    w = ctx.samples(components=2)[0][1]
    res = {}
    for name, coef in _coefficients(ctx).items():
        coef.validate(ctx.grid)
        for m in (-1.0, -2.0):
            for g in gammas:
                res[f"{name}/m={m}/gamma={g}"] = ce.verify_normal_commutator(w, m, g, coef, ctx.cut).residuals[g]
    return CheckResult(cid, _status(max(res.values()) <= tol), {"residual": res}, {"residual": tol})


def check_commutator_order(ctx: Context) -> CheckResult:
    cid = "normal-commutator-order"
    drift_tol = ctx.tol(cid, "drift", 0.10)
    coef = ce.default_coefficient(ctx.grid)
    out, ok, tables = {}, True, []
    for m in (-1.0, -2.0):
        rep = ce.symbol_order_profile(m, coef, ctx.cut, ctx.grid, ctx.sweep)
        out[str(m)] = rep.details | {"drift": rep.drift}
        ok &= all(np.isfinite(list(rep.bounds.values()))) and rep.drift <= drift_tol
        tables += [{"order": m, "alpha": int(a), "gamma": float(g), "sup": v} for a, d in rep.details["per_alpha"].items() for g, v in d.items()]
    return CheckResult(cid, _status(ok), out, {"drift": drift_tol}, tables={"sup": tables})


# ----------------------------------------------------------------------------
# pipeline


def _ledger_identity(ledger: bp.EstimateLedger):
    if not ledger.flags.get("identity_ok", False):
        raise InternalInconsistency(f"regularized system identity residuals {ledger.residuals}")


def _chain_check(statement: int) -> Callable:
    def run(ctx: Context) -> CheckResult:
        cid = f"chain-bounds-statement-{statement}"
        ledger = ctx.ledger(statement)
        _ledger_identity(ledger)
        flags = ledger.flags
        measured = {
            "gamma1": ledger.constants.get("gamma1"),
            "C_F": ledger.constants.get("C_F"),
            "C_G": ledger.constants.get("C_G"),
            "C_F_drift": flags.get("C_F_drift"),
            "C_G_drift": flags.get("C_G_drift"),
            "comm_tan_drift": flags.get("comm_tan_drift"),
            "C_F_per_gamma": ledger.constants.get("C_F_per_gamma"),
            "C_G_per_gamma": ledger.constants.get("C_G_per_gamma"),
            "residuals": ledger.residuals,
            "lower_bound_failures_at_max_gamma": [list(x) for x in flags.get("lower_bound_failures_at_max_gamma", [])],
        }
        ok = flags.get("chain_verdict", ledger.verdict) == "PASS"
        return CheckResult(cid, _status(ok), measured, {"gamma1_max": 16.0, "drift": bp.CHAIN_DRIFT_TOL, "identity": bp.IDENTITY_TOL})

    return run


def _demo_check(statement: int) -> Callable:
    def run(ctx: Context) -> CheckResult:
        cid = f"energy-estimate-statement-{statement}"
        ledger = ctx.ledger(statement)
        _ledger_identity(ledger)
        measured = {
            "C0": ledger.constants.get("C0"),
            "C_breve": ledger.constants.get("C_breve"),
            "gamma1": ledger.constants.get("gamma1"),
            "gamma_absorb": ledger.constants.get("gamma_absorb"),
            "final_holds": ledger.flags.get("final_holds"),
            "hypothesis_diverging": ledger.flags.get("hypothesis_diverging"),
            "C0_per_gamma": ledger.constants.get("C0_per_gamma"),
            "seminorms": bp.lower_order_seminorms(ctx.toy_problem(), ctx.sweep),
        }
        tables = {name: [dict(zip(("sample_id", "gamma", "lhs", "rhs", "ratio"), row)) for row in rows] for name, rows in ledger.rows.items()}
        return CheckResult(cid, ledger.verdict, measured, {"final_ratio": 1.0}, tables=tables)

    return run


# ----------------------------------------------------------------------------
# registry

REGISTRY: dict = {
    "sharp-transform-identities": ("transforms", check_sharp_identities),
    "norm-equivalence-band": ("transforms", check_norm_equivalence),
    "weight-two-sided-inverse": ("symbols", check_two_sided_inverse),
    "weight-peetre-bound": ("symbols", check_peetre),
    "multiplication-quantization": ("symbols", check_multiplication),
    "zero-order-degeneracies": ("mollified", check_zero_order),
    "smoothing-remainder-decay": ("mollified", check_decay),
    "cutoff-support-preservation": ("mollified", check_support),
    "boundary-trace-identity": ("mollified", check_trace),
    "boundary-symbol-splitting": ("mollified", check_beta),
    "normal-commutator-identity": ("commutators", check_normal_commutator),
    "normal-commutator-order": ("commutators", check_commutator_order),
    "chain-bounds-statement-1": ("pipeline-1", _chain_check(1)),
    "energy-estimate-statement-1": ("pipeline-1", _demo_check(1)),
    "chain-bounds-statement-2": ("pipeline-2", _chain_check(2)),
    "energy-estimate-statement-2": ("pipeline-2", _demo_check(2)),
}


def checks_for(suite: str, disabled=()) -> list:
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return [cid for cid, (s, _) in REGISTRY.items() if (suite == "all" or s == suite) and cid not in set(disabled)]


def run_check(cid: str, ctx: Context) -> CheckResult:
    t0 = time.perf_counter()
    res = REGISTRY[cid][1](ctx)
    res.runtime = time.perf_counter() - t0
    return res
