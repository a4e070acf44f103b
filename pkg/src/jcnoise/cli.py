"""Command-line front end.

    jcnoise state  --state mtcs --alpha-sq 10 --nbar 1 --q 0.5 --out fig1_mtcs.csv
    jcnoise evolve --state dts --alpha-sq 10 --nbar 1 --out fig2_dts_1.csv
    jcnoise verify --cutoff 150 --out report.txt

Exit codes: 0 success, 1 runtime or IO failure, 2 usage error, 3 failed
verification.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CutoffTooSmall, JCNoiseError
from .observables import time_series
from .states import (
    DEFAULT_CUTOFF,
    FieldState,
    coherent_state,
    displaced_thermal,
    equal_overlap_q,
    mtcs,
    pacs,
    photon_add,
    photon_distribution,
    thermal_state,
)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

STATE_KINDS = ("coherent", "thermal", "dts", "mtcs", "pacs", "photon_added_dts", "photon_added_mtcs")
SCENARIOS = {"state": "distribution", "evolve": "evolve", "verify": "verify"}
# sidecar keys that describe a run but are not inputs
INFO_KEYS = {"scenario", "q_resolved", "tail_mass", "version"}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "evolve"
    state: str = "dts"
    alpha_sq: float = 10.0
    theta: float = 0.0
    nbar: float = 0.0
    q: float | None = None
    equal_overlap: bool = False
    order: int = 1
    cutoff: int = DEFAULT_CUTOFF
    t_max: float = 25.0
    steps: int = 2001
    propagator: str = "analytic"
    out: str | None = None

    @property
    def alpha(self) -> complex:
        return math.sqrt(self.alpha_sq) * complex(math.cos(self.theta), math.sin(self.theta))

    def resolved_q(self) -> float | None:
        if not self.state.endswith("mtcs"):
            return None
        if self.equal_overlap:
            return equal_overlap_q(self.alpha, self.nbar)
        return self.q


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_field_flags(p):
    p.add_argument("--config", help="flat key=value file; flags given here override it")
    p.add_argument("--state", choices=STATE_KINDS, help="field state kind")
    p.add_argument("--alpha-sq", type=float, help="|alpha|^2, coherent photon number")
    p.add_argument("--theta", type=float, help="phase of alpha in radians (default 0)")
    p.add_argument("--nbar", type=float, help="mean thermal photon number")
    p.add_argument("--q", type=float, help="coherent weight of the mixed thermal-coherent state")
    p.add_argument("--equal-overlap", action="store_const", const=True,
                   help="choose q so the mixture and the displaced thermal state overlap |alpha> equally")
    p.add_argument("--order", type=int, help="photon-addition order for --state pacs (default 1)")
    p.add_argument("--cutoff", type=int, help=f"Fock-space dimension (default {DEFAULT_CUTOFF})")
    p.add_argument("--out", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jcnoise", description="Thermal noise in Jaynes-Cummings dynamics.")
    parser.add_argument("--version", action="version", version=f"jcnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("state", help="write the photon-number distribution (n,p)")
    _add_field_flags(p)
    p = sub.add_parser("evolve", help="write inversion and negativity time series")
    _add_field_flags(p)
    p.add_argument("--t-max", type=float, help="final scaled time lambda*t (default 25)")
    p.add_argument("--steps", type=int, help="number of grid points (default 2001)")
    p.add_argument("--propagator", choices=("analytic", "numeric"), help="default analytic")
    p = sub.add_parser("verify", help="run the self-verification suite")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--debug-perturb", choices=("rabi_sqrt_n",), help=argparse.SUPPRESS)
    return parser


def read_config_file(path) -> dict:
    known = {f.name for f in fields(ExperimentConfig)} | INFO_KEYS
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        if key not in INFO_KEYS:
            values[key] = value.strip()
    return values


def _coerce(key, raw):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[key]
    if raw == "" and key in ("q", "out"):
        return None
    try:
        if key in ("cutoff", "steps", "order"):
            return int(raw)
        if key == "equal_overlap":
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if "float" in str(kind):
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"invalid value for {key}: {raw!r}") from exc
    return raw


def _validate(cfg: ExperimentConfig) -> None:
    def bad(flag, msg):
        raise UsageError(f"--{flag.replace('_', '-')}: {msg}")

    for name in ("alpha_sq", "theta", "nbar", "t_max"):
        if not math.isfinite(getattr(cfg, name)):
            bad(name, "must be finite")
    if cfg.state not in STATE_KINDS:
        bad("state", f"must be one of {', '.join(STATE_KINDS)}")
    if cfg.propagator not in ("analytic", "numeric"):
        bad("propagator", "must be analytic or numeric")
    if cfg.alpha_sq < 0:
        bad("alpha_sq", "must be non-negative")
    if cfg.nbar < 0:
        bad("nbar", "must be non-negative")
    if cfg.q is not None and not (math.isfinite(cfg.q) and 0 <= cfg.q <= 1):
        bad("q", "must lie in [0, 1]")
    if cfg.cutoff < 2:
        bad("cutoff", "must be at least 2")
    if cfg.order < 0:
        bad("order", "must be non-negative")
    if cfg.t_max < 0:
        bad("t_max", "must be non-negative")
    if cfg.steps < 1 or (cfg.steps > 1 and cfg.t_max == 0):
        bad("steps", "must be positive, and t-max must be positive when steps > 1")
    if cfg.state.endswith("mtcs") and cfg.q is None and not cfg.equal_overlap:
        bad("q", "mixed states need --q or --equal-overlap")
    if cfg.out is None:
        bad("out", "an output path is required")


def parse_config(argv) -> tuple[ExperimentConfig, argparse.Namespace]:
    """Flags over config file over defaults; raises UsageError."""
    ns = build_parser().parse_args(argv)
    cfg = ExperimentConfig(scenario=SCENARIOS[ns.command])
    if ns.command == "verify":
        return cfg, ns
    merged = {}
    if ns.config:
        merged.update({k: _coerce(k, v) for k, v in read_config_file(ns.config).items()})
    for f in fields(ExperimentConfig):
        val = getattr(ns, f.name, None)
        if val is not None and f.name != "scenario":
            merged[f.name] = val
    for key, val in merged.items():
        setattr(cfg, key, val)
    _validate(cfg)
    return cfg, ns


def build_field(cfg: ExperimentConfig) -> FieldState:
    a, N = cfg.alpha, cfg.cutoff
    kind = cfg.state
    if kind == "coherent":
        return coherent_state(a, N)
    if kind == "thermal":
        return thermal_state(cfg.nbar, N)
    if kind == "pacs":
        return pacs(a, cfg.order, N)
    if kind.endswith("dts"):
        field = displaced_thermal(a, cfg.nbar, N)
    else:
        field = mtcs(a, cfg.nbar, cfg.resolved_q(), N)
    return photon_add(field) if kind.startswith("photon_added") else field


def _num(x: float) -> str:
    return f"{float(x) + 0.0:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def distribution_csv(p: np.ndarray) -> str:
    if abs(math.fsum(p) - 1) > 1e-9:
        raise JCNoiseError(f"distribution sums to {math.fsum(p)!r}, not 1")
    return "n,p\n" + "".join(f"{n},{_num(v)}\n" for n, v in enumerate(p))


def series_csv(series) -> str:
    if np.any(np.abs(series.inversion) > 1 + 1e-9):
        raise JCNoiseError("inversion left [-1, 1]")
    if np.any(series.negativity < -1e-10):
        raise JCNoiseError("negative negativity")
    return "lambda_t,inversion,negativity\n" + "".join(
        f"{_num(t)},{_num(w)},{_num(n)}\n" for t, w, n in series.rows)


def metadata_text(cfg: ExperimentConfig, field: FieldState) -> str:
    items = asdict(cfg)
    items["q_resolved"] = cfg.resolved_q()
    items["tail_mass"] = field.tail_mass
    items["version"] = __version__
    lines = []
    for key, val in items.items():
        if val is None:
            val = ""
        elif isinstance(val, bool):
            val = str(val).lower()
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"


_PLOT_TEMPLATE = '''\
"""Render {csv_name}; needs matplotlib."""
import csv
import sys

import matplotlib.pyplot as plt

with open({csv_name!r}, newline="") as fh:
    rows = list(csv.DictReader(fh))
{body}
out = sys.argv[1] if len(sys.argv) > 1 else {png_name!r}
fig.tight_layout()
fig.savefig(out, dpi=150)
'''

_PLOT_DISTRIBUTION = '''\
n = [int(r["n"]) for r in rows]
p = [float(r["p"]) for r in rows]
last = max(i for i, v in enumerate(p) if v > 1e-6 * max(p))
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(n[: last + 1], p[: last + 1], "o-", ms=3)
ax.set_xlabel("n")
ax.set_ylabel("P(n)")
ax.set_title({title!r})'''

_PLOT_SERIES = '''\
t = [float(r["lambda_t"]) for r in rows]
fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
top.plot(t, [float(r["inversion"]) for r in rows], lw=0.7)
top.set_ylabel("W")
top.set_title({title!r})
bottom.plot(t, [float(r["negativity"]) for r in rows], lw=0.7)
bottom.set_ylabel("N")
bottom.set_xlabel("lambda t")'''


def plot_script(cfg: ExperimentConfig, csv_path: Path) -> str:
    title = f"{cfg.state}  |alpha|^2={cfg.alpha_sq:g}  nbar={cfg.nbar:g}"
    body = (_PLOT_DISTRIBUTION if cfg.scenario == "distribution" else _PLOT_SERIES).format(title=title)
    return _PLOT_TEMPLATE.format(csv_name=csv_path.name, png_name=csv_path.stem + ".png", body=body)


def run_scenario(cfg: ExperimentConfig) -> list[Path]:
    """Compute the configured scenario and write CSV, sidecar and plot script."""
    field = build_field(cfg)
    out = Path(cfg.out)
    if cfg.scenario == "distribution":
        text = distribution_csv(photon_distribution(field))
    else:
        grid = np.linspace(0.0, cfg.t_max, cfg.steps)
        text = series_csv(time_series(field, grid, cfg.propagator))
    meta = Path(f"{out}.meta")
    plot = Path(f"{out}.plot")
    _atomic_write(out, text)
    _atomic_write(meta, metadata_text(cfg, field))
    _atomic_write(plot, plot_script(cfg, out))
    return [out, meta, plot]


def _run_verify(ns) -> int:
    from .verification import format_report, verify_suite

    if ns.cutoff < 60:
        raise UsageError("--cutoff: verification needs cutoff >= 60")
    rows = verify_suite(ns.cutoff, ns.debug_perturb)
    report = format_report(rows, ns.cutoff)
    sys.stdout.write(report)
    if ns.out:
        _atomic_write(Path(ns.out), report)
    return EXIT_VERIFY if any(r.failed for r in rows) else EXIT_OK


def main(argv=None) -> int:
    try:
        cfg, ns = parse_config(sys.argv[1:] if argv is None else argv)
        if ns.command == "verify":
            return _run_verify(ns)
        for path in run_scenario(cfg):
            print(path)
        return EXIT_OK
    except UsageError as exc:
        print(f"jcnoise: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CutoffTooSmall as exc:
        print(f"jcnoise: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (JCNoiseError, OSError) as exc:
        print(f"jcnoise: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def run():
    sys.exit(main())
