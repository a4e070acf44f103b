"""Self-verification checks run by ``jcnoise verify`` and the acceptance tests.

Every check yields one or more :class:`Check` rows.  A row is skipped, not
failed, when the requested cutoff cannot hold the states it needs.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import evolve_analytic, evolve_numeric, initial_joint_state, trace_distance
from .errors import CutoffTooSmall, MethodDiverged
from .observables import (
    default_grid,
    negativity,
    population_inversion,
    revival_contrast,
    time_series,
)
from .states import (
    DTS_METHODS,
    TruncationWarning,
    coherent_overlap,
    coherent_state,
    displaced_thermal,
    dts_mixedness_closed_form,
    equal_overlap_q,
    local_maxima,
    mtcs,
    mtcs_mixedness_closed_form,
    number_state,
    photon_add,
    photon_add_normalizer,
    photon_distribution,
    purity_deficit,
    thermal_state,
)

ALPHA = math.sqrt(10.0)
AGREEMENT_DIM = 60
PERTURBATIONS = ("rabi_sqrt_n",)


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    measured: str
    bound: str
    note: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "FAIL"

    def line(self) -> str:
        text = f"{self.status:<4}  {self.name:<34} measured={self.measured}  bound={self.bound}"
        return f"{text}  ({self.note})" if self.note else text


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _leq(name, value, bound, note=""):
    return Check(name, "PASS" if value <= bound else "FAIL", _fmt(value), f"<= {bound:g}", note)


def _truth(name, ok, measured, bound):
    return Check(name, "PASS" if ok else "FAIL", measured, bound)


def _skip(name, exc):
    return Check(name, "SKIP", "-", "-", f"cutoff too small: {exc}".split(";")[0])


def check_triple_dts(cutoff, perturb=None):
    name = "01 dts triple construction"
    try:
        mats = [displaced_thermal(ALPHA, 1.0, cutoff, m).rho for m in DTS_METHODS]
    except (CutoffTooSmall, MethodDiverged) as exc:
        return [_skip(name, exc)]
    diff = max(float(np.max(np.abs(mats[0] - m))) for m in mats[1:])
    return [_leq(name, diff, 1e-8)]


def check_equal_overlap(cutoff, perturb=None):
    q = equal_overlap_q(ALPHA, 1.0)
    rows = [_truth("02a equal-overlap q in [0.49,0.51]", 0.49 <= q <= 0.51, f"{q:.6f}", "[0.49, 0.51]")]
    try:
        ov = coherent_overlap(mtcs(ALPHA, 1.0, q, cutoff), ALPHA)
    except CutoffTooSmall as exc:
        return rows + [_skip("02b mtcs overlap = 1/(1+nbar)", exc)]
    return rows + [_leq("02b mtcs overlap = 1/(1+nbar)", abs(ov - 0.5), 1e-9)]


def check_mixedness(cutoff, perturb=None):
    name = "03a mixedness closed forms"
    try:
        err = 0.0
        dts_vals = {}
        for a2 in (1.0, 10.0):
            a = math.sqrt(a2)
            for nb in (0.1, 1.0):
                d = purity_deficit(displaced_thermal(a, nb, cutoff))
                dts_vals.setdefault(nb, []).append(d)
                err = max(err, abs(d - dts_mixedness_closed_form(nb)))
                q = equal_overlap_q(a, nb)
                m = purity_deficit(mtcs(a, nb, q, cutoff))
                err = max(err, abs(m - mtcs_mixedness_closed_form(a, nb, q)))
        spread = max(max(v) - min(v) for v in dts_vals.values())
    except CutoffTooSmall as exc:
        return [_skip(name, exc), _skip("03b dts mixedness alpha-free", exc)]
    return [_leq(name, err, 1e-9), _leq("03b dts mixedness alpha-free", spread, 1e-9)]


def check_vacuum_rabi(cutoff, perturb=None):
    shift = 0 if perturb == "rabi_sqrt_n" else 1
    vac = number_state(0, min(cutoff, 8))
    grid = default_grid()
    W = np.array([population_inversion(evolve_analytic(vac, t, rabi_shift=shift)) for t in grid])
    return [_leq("04 vacuum Rabi W = cos(2 lt)", float(np.max(np.abs(W - np.cos(2 * grid)))), 1e-8)]


def agreement_fields(field_dim=AGREEMENT_DIM):
    """The four field kinds at the reduced dimension used for propagator agreement."""
    q = equal_overlap_q(ALPHA, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        d = displaced_thermal(ALPHA, 1.0, field_dim, strict=False)
        m = mtcs(ALPHA, 1.0, q, field_dim, strict=False)
        fields = {"dts": d, "mtcs": m,
                  "photon_added_dts": photon_add(d, strict=False),
                  "photon_added_mtcs": photon_add(m, strict=False)}
    return fields


def check_propagators(cutoff, perturb=None):
    worst = 0.0
    for field in agreement_fields().values():
        J = initial_joint_state(field)
        for t in (5.0, 15.0, 25.0):
            worst = max(worst, trace_distance(evolve_analytic(field, t), evolve_numeric(J, None, t)))
    return [_leq("05 analytic vs numeric (dim 60)", worst, 1e-8)]


def check_negativity(cutoff, perturb=None):
    vac = number_state(0, min(cutoff, 8))
    n = negativity(evolve_analytic(vac, math.pi / 4))
    rows = [_leq("06a vacuum negativity at pi/4", abs(n - 0.5), 1e-8)]
    try:
        q = equal_overlap_q(ALPHA, 1.0)
        fields = [coherent_state(ALPHA, cutoff), thermal_state(1.0, cutoff),
                  displaced_thermal(ALPHA, 1.0, cutoff), mtcs(ALPHA, 1.0, q, cutoff)]
        fields += [photon_add(f) for f in fields[2:]]
    except CutoffTooSmall as exc:
        return rows + [_skip("06b product-state negativity", exc)]
    worst = max(negativity(initial_joint_state(f)) for f in fields)
    return rows + [_leq("06b product-state negativity", worst, 1e-10)]


def _contrast(field):
    return revival_contrast(time_series(field, default_grid(), with_negativity=False))


def _calibrated(nbar, cutoff):
    return mtcs(ALPHA, nbar, equal_overlap_q(ALPHA, nbar), cutoff)


def check_noise_ordering(cutoff, perturb=None):
    try:
        c_dts = _contrast(displaced_thermal(ALPHA, 1.0, cutoff))
        c_m = {nb: _contrast(_calibrated(nb, cutoff)) for nb in (0.0, 0.1, 1.0)}
    except CutoffTooSmall as exc:
        return [_skip("07a contrast dts(1) > mtcs(1)", exc), _skip("07b contrast mtcs(1)<(0.1)<(0)", exc)]
    return [
        _truth("07a contrast dts(1) > mtcs(1)", c_dts > c_m[1.0],
               f"{c_dts:.4f} vs {c_m[1.0]:.4f}", "dts > mtcs"),
        _truth("07b contrast mtcs(1)<(0.1)<(0)", c_m[1.0] < c_m[0.1] < c_m[0.0],
               f"{c_m[1.0]:.4f}, {c_m[0.1]:.4f}, {c_m[0.0]:.4f}", "increasing"),
    ]


def check_photon_add_recovery(cutoff, perturb=None):
    try:
        plain = _calibrated(1.0, cutoff)
        c_plain = _contrast(plain)
        c_added = _contrast(photon_add(plain))
        c_clean = _contrast(_calibrated(0.0, cutoff))
    except CutoffTooSmall as exc:
        return [_skip("08a contrast pa-mtcs(1) > mtcs(1)", exc), _skip("08b pa-mtcs(1) nearer noise-free", exc)]
    return [
        _truth("08a contrast pa-mtcs(1) > mtcs(1)", c_added > c_plain,
               f"{c_added:.4f} vs {c_plain:.4f}", "added > plain"),
        _truth("08b pa-mtcs(1) nearer noise-free", abs(c_added - c_clean) < abs(c_plain - c_clean),
               f"{abs(c_added - c_clean):.4f} vs {abs(c_plain - c_clean):.4f}", "added gap < plain gap"),
    ]


def check_photon_add_structure(cutoff, perturb=None):
    try:
        vac_worst = 0.0
        norm_err = 0.0
        for nb in (0.1, 1.0):
            q = equal_overlap_q(ALPHA, nb)
            d = displaced_thermal(ALPHA, nb, cutoff)
            m = mtcs(ALPHA, nb, q, cutoff)
            for f in (d, m):
                vac_worst = max(vac_worst, abs(photon_add(f).rho[0, 0]))
            norm_err = max(norm_err, abs(photon_add_normalizer(d) - (1 + nb + 10.0)),
                           abs(photon_add_normalizer(m) - (1 + (1 - q) * nb + q * 10.0)))
    except CutoffTooSmall as exc:
        return [_skip("09a photon-added vacuum weight", exc), _skip("09b photon-add normalizers", exc)]
    return [_leq("09a photon-added vacuum weight", vac_worst, 1e-14),
            _leq("09b photon-add normalizers", norm_err, 1e-9)]


def check_distribution_shape(cutoff, perturb=None):
    try:
        pm = local_maxima(photon_distribution(mtcs(ALPHA, 1.0, 0.5, cutoff)))
        pd = local_maxima(photon_distribution(displaced_thermal(ALPHA, 1.0, cutoff)))
    except CutoffTooSmall as exc:
        return [_skip("10 distribution peak structure", exc)]
    ok = len(pm) == 2 and pm[0] == 0 and len(pd) == 1
    return [_truth("10 distribution peak structure", ok, f"mtcs peaks {pm}, dts peaks {pd}",
                   "mtcs two peaks incl. 0, dts one")]


def check_determinism(cutoff, perturb=None):
    from .cli import parse_config, run_scenario

    def run(argv):
        run_scenario(parse_config(argv)[0])

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        args = ["evolve", "--state", "mtcs", "--alpha-sq", "10", "--nbar", "1", "--equal-overlap",
                "--cutoff", str(min(cutoff, 60)), "--t-max", "5", "--steps", "51"]
        run(args + ["--out", str(tmp / "a.csv")])
        run(args + ["--out", str(tmp / "b.csv")])
        run(["evolve", "--config", str(tmp / "a.csv.meta"), "--out", str(tmp / "c.csv")])
        same = filecmp.cmp(tmp / "a.csv", tmp / "b.csv", shallow=False) \
            and filecmp.cmp(tmp / "a.csv", tmp / "c.csv", shallow=False)
    return [_truth("11 byte-identical reruns", same, "identical" if same else "differ", "identical")]


CHECKS = (
    check_triple_dts,
    check_equal_overlap,
    check_mixedness,
    check_vacuum_rabi,
    check_propagators,
    check_negativity,
    check_noise_ordering,
    check_photon_add_recovery,
    check_photon_add_structure,
    check_distribution_shape,
    check_determinism,
)


def verify_suite(cutoff: int = 150, perturb: str | None = None) -> list[Check]:
    if cutoff < AGREEMENT_DIM:
        raise ValueError(f"verification needs cutoff >= {AGREEMENT_DIM}")
    if perturb is not None and perturb not in PERTURBATIONS:
        raise ValueError(f"unknown perturbation {perturb!r}")
    rows = []
    for check in CHECKS:
        rows.extend(check(cutoff, perturb))
    return rows


def format_report(rows: list[Check], cutoff: int) -> str:
    failed = sum(r.failed for r in rows)
    skipped = sum(r.status == "SKIP" for r in rows)
    lines = [f"jcnoise verification report (cutoff={cutoff})"]
    lines += [r.line() for r in rows]
    lines.append(f"summary: {len(rows) - failed - skipped} passed, {failed} failed, {skipped} skipped")
    return "\n".join(lines) + "\n"
