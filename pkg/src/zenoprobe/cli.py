"""Command-line driver.

Exit codes: 0 success, 1 acceptance failure (paper-check), 2 usage or parse
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import InvalidConfigError, ZenoProbeError
from .estimator import estimate_adaptive
from .modelio import load_model, model_to_dict
from .models import summarize
from .paper_check import format_report, paper_check
from .protocol import validity_margin
from .scan import cells_to_csv, config_from_dict, default_config, heatmap_svg, run_scan


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_scan(args) -> int:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise InvalidConfigError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{args.config}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        config = config_from_dict(data)
    else:
        config = default_config()
    cells = run_scan(config, workers=args.workers)
    Path(args.out_csv).write_text(cells_to_csv(cells))
    if config.mode in ("exact", "both") and args.out_svg_exact:
        Path(args.out_svg_exact).write_text(heatmap_svg(cells, config, "exact", "P_e^NQ, exact"))
    if config.mode in ("second_order", "both") and args.out_svg_2nd:
        Path(args.out_svg_2nd).write_text(
            heatmap_svg(cells, config, "second_order", "P_e^NQ, second order"))
    print(f"{len(cells)} cells written to {args.out_csv}")
    return 0


def cmd_paper_check(args) -> int:
    report = paper_check(seed=args.seed, pooled_campaigns=args.campaigns)
    print(format_report(report))
    if args.json:
        Path(args.json).write_text(_dump(report) + "\n")
    return 0 if report["passed"] else 1


def cmd_estimate(args) -> int:
    model = load_model(args.model)
    if not 0 < args.nu <= math.pi or args.tau <= 0:
        raise InvalidConfigError("need tau > 0 and 0 < nu <= pi")
    summary = summarize(model)
    result = estimate_adaptive(model, args.tau, args.nu, args.budget, args.seed)
    margin = validity_margin(args.tau, args.nu, summary.omega_bar)
    out = {
        "config": {"model": model_to_dict(model), "tau": args.tau, "nu": args.nu,
                   "budget": args.budget, "seed": args.seed},
        "model_summary": summary.to_dict(),
        "validity_margin": {"margin": margin.margin, "tau_omega_bar": margin.tau_omega_bar},
        "result": result.to_dict(),
    }
    print(_dump(out))
    return 0


def cmd_model_info(args) -> int:
    print(_dump(summarize(load_model(args.model)).to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenoprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="survival heatmaps over a (tau, pi - nu) grid")
    p.add_argument("--config", help="ScanConfig JSON (default: 25x25 two-level grid)")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg-exact")
    p.add_argument("--out-svg-2nd")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("paper-check", help="run the two-level check point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--campaigns", type=int, default=1000, help="campaigns pooled for survival")
    p.add_argument("--json", help="also write the report as JSON here")
    p.set_defaults(func=cmd_paper_check)

    p = sub.add_parser("estimate", help="adaptive estimate of Delta H_ee for a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("model-info", help="Delta H_ee, Omega_bar and energy shift of a model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_model_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ZenoProbeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
