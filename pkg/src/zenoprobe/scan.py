"""Survival over a (tau, nu) grid, with CSV and SVG heatmap output.

Each cell fixes N (by default the pi/4 rule of ``choose_n``, using the model's
true Delta H_ee) and compares the full-campaign survival computed from exact
cycle amplitudes with the second-order prediction.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidConfigError, ParseError
from .estimator import choose_n, predicted_survival, predicted_survival_second_order
from .modelio import model_to_dict, parse_model
from .models import AnyModel, TwoLevelModel, delta_h_ee, omega_bar, shift_energy_zero
from .protocol import ProtocolParams, compute_cycle_amplitudes, second_order_phi, snr, validity_margin

CSV_HEADER = ["tau", "nu", "pi_minus_nu", "margin", "snr", "n_used",
              "p_all_exact", "p_all_second_order", "abs_diff"]
MODES = ("exact", "second_order", "both")
N_RULES = ("pi_over_4", "inverse_phi")

# viridis sampled at 8 evenly spaced points
RAMP = ["#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725"]


@dataclass(frozen=True)
class ScanConfig:
    model: AnyModel
    tau_grid: tuple
    pi_minus_nu_grid: tuple
    q_rounds: int = 100
    mode: str = "both"
    n_rule: str = "pi_over_4"

    @property
    def nu_grid(self) -> tuple:
        return tuple(math.pi - x for x in self.pi_minus_nu_grid)

    def to_dict(self) -> dict:
        return {
            "model": model_to_dict(self.model),
            "tau_grid": list(self.tau_grid),
            "pi_minus_nu_grid": list(self.pi_minus_nu_grid),
            "q_rounds": self.q_rounds,
            "mode": self.mode,
            "n_rule": self.n_rule,
        }


@dataclass(frozen=True)
class ScanCell:
    tau: float
    nu: float
    p_all_exact: float
    p_all_second_order: float
    margin: float
    snr: float
    n_used: float

    @property
    def abs_diff(self) -> float:
        return abs(self.p_all_exact - self.p_all_second_order)

    def row(self) -> list:
        return [self.tau, self.nu, math.pi - self.nu, self.margin, self.snr, self.n_used,
                self.p_all_exact, self.p_all_second_order, self.abs_diff]


def default_config() -> ScanConfig:
    return ScanConfig(
        model=TwoLevelModel(1.0, 1.0),
        tau_grid=tuple(np.logspace(-9, -1, 25).tolist()),
        pi_minus_nu_grid=tuple(np.logspace(-6, 0, 25).tolist()),
    )


def _grid(value, field: str) -> tuple:
    if isinstance(value, dict):
        try:
            start, stop, num = float(value["start"]), float(value["stop"]), int(value["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfigError(f"{field}: log grid needs numeric start, stop, num ({exc})") from exc
        if start <= 0 or stop <= 0 or num < 1:
            raise InvalidConfigError(f"{field}: start and stop must be positive, num >= 1")
        return tuple(np.logspace(math.log10(start), math.log10(stop), num).tolist())
    if isinstance(value, list):
        if not value:
            raise InvalidConfigError(f"{field}: grid must not be empty")
        out = []
        for i, x in enumerate(value):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise InvalidConfigError(f"{field}[{i}]: expected a finite number, got {x!r}")
            out.append(float(x))
        return tuple(out)
    raise InvalidConfigError(f"{field}: expected a list or {{start, stop, num}}")


def config_from_dict(data: dict) -> ScanConfig:
    if not isinstance(data, dict):
        raise InvalidConfigError("scan config must be a JSON object")
    base = default_config()
    known = {"model", "tau_grid", "pi_minus_nu_grid", "q_rounds", "mode", "n_rule"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfigError(f"unknown field(s): {', '.join(unknown)}")
    try:
        model = parse_model(data["model"]) if "model" in data else base.model
    except ParseError as exc:
        raise InvalidConfigError(f"model: {exc}") from exc
    taus = _grid(data["tau_grid"], "tau_grid") if "tau_grid" in data else base.tau_grid
    gaps = _grid(data["pi_minus_nu_grid"], "pi_minus_nu_grid") if "pi_minus_nu_grid" in data else base.pi_minus_nu_grid
    for i, t in enumerate(taus):
        if t <= 0:
            raise InvalidConfigError(f"tau_grid[{i}]: tau must be positive, got {t!r}")
    for i, g in enumerate(gaps):
        if not 0 < g < math.pi:
            raise InvalidConfigError(f"pi_minus_nu_grid[{i}]: need 0 < pi - nu < pi, got {g!r}")
    q = data.get("q_rounds", base.q_rounds)
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise InvalidConfigError(f"q_rounds: expected a positive integer, got {q!r}")
    mode = data.get("mode", base.mode)
    if mode not in MODES:
        raise InvalidConfigError(f"mode: expected one of {MODES}, got {mode!r}")
    n_rule = data.get("n_rule", base.n_rule)
    if n_rule not in N_RULES:
        raise InvalidConfigError(f"n_rule: expected one of {N_RULES}, got {n_rule!r}")
    return ScanConfig(model, taus, gaps, q, mode, n_rule)


def cycles_for(tau: float, nu: float, delta_h: float, n_rule: str) -> float:
    if n_rule == "inverse_phi":
        return float(math.ceil(1.0 / abs(second_order_phi(tau, nu, delta_h))))
    return choose_n(tau, nu, delta_h)


def evaluate_cell(model: AnyModel, tau: float, nu: float, q_rounds: int = 100,
                  n_rule: str = "pi_over_4") -> ScanCell:
    shifted, _ = shift_energy_zero(model)
    dh = delta_h_ee(shifted)
    ob = omega_bar(shifted)
    s = snr(nu)
    margin = validity_margin(tau, nu, ob).margin
    if dh == 0.0:
        # nothing couples out of |e>: the state is frozen for any N
        return ScanCell(tau, nu, 1.0, 1.0, margin, s, 1.0)
    n = cycles_for(tau, nu, dh, n_rule)
    params = ProtocolParams(tau, nu, n, q_rounds)
    exact = predicted_survival(params, compute_cycle_amplitudes(shifted, tau, nu)).p_all
    second = predicted_survival_second_order(params, dh).p_all
    return ScanCell(tau, nu, exact, second, margin, s, n)


def _cell_job(args):
    return evaluate_cell(*args)


def run_scan(config: ScanConfig, workers: Optional[int] = 1) -> list[ScanCell]:
    """All cells in row-major (pi - nu outer, tau inner) order, whatever ``workers`` is."""
    jobs = [(config.model, tau, nu, config.q_rounds, config.n_rule)
            for nu in config.nu_grid for tau in config.tau_grid]
    if workers is not None and workers <= 1:
        return [_cell_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell_job, jobs, chunksize=max(1, len(jobs) // 64)))


def cells_to_csv(cells: list[ScanCell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in cells:
        writer.writerow(["%.17g" % x for x in cell.row()])
    return buf.getvalue()


def ramp_color(value: float) -> str:
    v = min(max(value, 0.0), 1.0) * (len(RAMP) - 1)
    i = min(int(v), len(RAMP) - 2)
    f = v - i
    a = [int(RAMP[i][k:k + 2], 16) for k in (1, 3, 5)]
    b = [int(RAMP[i + 1][k:k + 2], 16) for k in (1, 3, 5)]
    return "#" + "".join(f"{round(x + f * (y - x)):02x}" for x, y in zip(a, b))


def heatmap_svg(cells: list[ScanCell], config: ScanConfig, which: str, title: str) -> str:
    """Heatmap of p_all over (log tau, log (pi - nu)); ``which`` is exact or second_order."""
    nx, ny = len(config.tau_grid), len(config.pi_minus_nu_grid)
    cw, ch = 20, 20
    left, top, bar = 70, 40, 60
    width, height = left + nx * cw + bar + 40, top + ny * ch + 60
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="20" font-size="13">{title}</text>',
    ]
    for idx, cell in enumerate(cells):
        j, i = divmod(idx, nx)
        value = cell.p_all_exact if which == "exact" else cell.p_all_second_order
        # larger pi - nu at the top
        y = top + (ny - 1 - j) * ch
        out.append(f'<rect x="{left + i * cw}" y="{y}" width="{cw}" height="{ch}" '
                   f'fill="{ramp_color(value)}"><title>tau={cell.tau:.3g} pi-nu={math.pi - cell.nu:.3g} '
                   f'p={value:.6f}</title></rect>')
    for i in range(0, nx, max(1, nx // 4)):
        x = left + i * cw + cw / 2
        out.append(f'<text x="{x}" y="{top + ny * ch + 15}" text-anchor="middle">'
                   f'{math.log10(config.tau_grid[i]):.1f}</text>')
    for j in range(0, ny, max(1, ny // 4)):
        y = top + (ny - 1 - j) * ch + ch / 2 + 4
        out.append(f'<text x="{left - 5}" y="{y}" text-anchor="end">'
                   f'{math.log10(config.pi_minus_nu_grid[j]):.1f}</text>')
    out.append(f'<text x="{left + nx * cw / 2}" y="{top + ny * ch + 35}" text-anchor="middle">'
               f'log10(tau * delta)</text>')
    out.append(f'<text x="15" y="{top + ny * ch / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ny * ch / 2})">log10(pi - nu)</text>')
    bx = left + nx * cw + 20
    steps = 40
    for k in range(steps):
        v = 1.0 - k / (steps - 1)
        out.append(f'<rect x="{bx}" y="{top + k * ny * ch / steps:.2f}" width="15" '
                   f'height="{ny * ch / steps + 0.5:.2f}" fill="{ramp_color(v)}"/>')
    out.append(f'<text x="{bx + 20}" y="{top + 8}">1</text>')
    out.append(f'<text x="{bx + 20}" y="{top + ny * ch}">0</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
