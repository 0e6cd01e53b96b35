"""Command-line client for fits, runs, comparisons, and parameter sweeps.

By default commands execute in-process against the library; with --server
they post the same payload to a running HTTP service and print its CSV, so
both paths produce identical bytes.  Exit status is 0 on success, 1 with a
named error on stderr for domain failures, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, error_model, harness

_FIT_HEADER = "scale,exponent,mse"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _split_schemes(values) -> list:
    out = []
    for v in values or []:
        out.extend(s for s in v.split(",") if s)
    return out


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise ValueError(f"server returned {resp.status_code}: {detail}")
    return resp.json()


def _scenario_ini(args) -> str | None:
    if args.scenario:
        return Path(args.scenario).read_text()
    return None


def _local_scenario(args):
    from .scenario import default_scenario, load_scenario

    if args.scenario:
        return load_scenario(Path(args.scenario).read_text())
    return default_scenario()


def _cmd_fit(args) -> None:
    if args.server:
        data = _post(args.server, "/fit", {"csv": Path(args.points).read_text()})
        scale, exponent, mse = data["scale"], data["exponent"], data["mse"]
    else:
        points = error_model.fit_points_from_csv(Path(args.points).read_text())
        params = error_model.fit(points)
        scale, exponent = params.scale, params.exponent
        mse = error_model.fit_mse(points, scale, exponent)
    _emit(f"{_FIT_HEADER}\n{_fmt(scale)},{_fmt(exponent)},{_fmt(mse)}\n",
          args.output)


def _cmd_run(args) -> None:
    if args.server:
        data = _post(args.server, "/run", {
            "scheme": args.scheme, "scenario_ini": _scenario_ini(args),
            "seed": args.seed, "draws": args.draws, "diag_mode": args.diag_mode,
        })
        _emit(data["csv"], args.output)
        return
    sc = _local_scenario(args)
    allocs = harness.run(sc, args.scheme, seed=args.seed, draws=args.draws,
                         diag_mode=args.diag_mode)
    _emit(harness.allocations_to_csv(allocs, sc), args.output)


def _cmd_compare(args) -> None:
    schemes = _split_schemes(args.scheme)
    if args.server:
        data = _post(args.server, "/compare", {
            "schemes": schemes, "scenario_ini": _scenario_ini(args),
            "seed": args.seed, "draws": args.draws, "diag_mode": args.diag_mode,
        })
        _emit(data["csv"], args.output)
        return
    sc = _local_scenario(args)
    rows = harness.compare(sc, schemes, seed=args.seed, draws=args.draws,
                           diag_mode=args.diag_mode)
    _emit(harness.allocations_to_csv(rows, sc), args.output)


def _cmd_sweep(args) -> None:
    schemes = _split_schemes(args.scheme)
    values = [float(v) for chunk in args.values for v in chunk.split(",") if v]
    if args.server:
        data = _post(args.server, "/sweep", {
            "param": args.param, "values": values, "schemes": schemes,
            "scenario_ini": _scenario_ini(args), "seed": args.seed,
            "draws": args.draws, "diag_mode": args.diag_mode,
        })
        _emit(data["csv"], args.output)
        return
    sc = _local_scenario(args)
    rows = harness.sweep(sc, args.param, values, schemes, seed=args.seed,
                         draws=args.draws, diag_mode=args.diag_mode)
    _emit(harness.sweep_to_csv(rows), args.output)


def _cmd_serve(args) -> None:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


def _add_common(sub: argparse.ArgumentParser, multi_scheme: bool) -> None:
    sub.add_argument("--scenario", help="scenario INI file (default: built-in)")
    sub.add_argument("--seed", type=int, default=0, help="channel RNG seed")
    sub.add_argument("--draws", type=int, default=1,
                     help="number of independent channel draws")
    sub.add_argument("--diag-mode", choices=("expected", "realized"),
                     default="expected", dest="diag_mode",
                     help="gain model: expected N*rho diagonal or per-draw realized")
    if multi_scheme:
        sub.add_argument("--scheme", action="append", required=True,
                         help="scheme name; repeat or comma-separate for several")
    else:
        sub.add_argument("--scheme", required=True, choices=harness.SCHEMES,
                         help="allocation scheme")
    sub.add_argument("--output", help="write CSV here instead of stdout")
    sub.add_argument("--server", help="POST to this service URL instead of "
                                      "solving in-process")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcpa",
        description="Learning-centric uplink power allocation: fit error "
                    "curves, allocate power, compare schemes. Reported "
                    "errors are model predictions, not trained-classifier "
                    "accuracies.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="fit a*v^-b to sample/error points")
    fit.add_argument("points", help="CSV of sample_count,error rows")
    fit.add_argument("--output", help="write CSV here instead of stdout")
    fit.add_argument("--server", help="POST to this service URL")
    fit.set_defaults(func=_cmd_fit)

    run = subs.add_parser("run", help="allocate power under one scheme")
    _add_common(run, multi_scheme=False)
    run.set_defaults(func=_cmd_run)

    cmp_ = subs.add_parser("compare", help="run several schemes side by side")
    _add_common(cmp_, multi_scheme=True)
    cmp_.set_defaults(func=_cmd_compare)

    swp = subs.add_parser("sweep", help="sweep T, N, or K and tabulate means")
    _add_common(swp, multi_scheme=True)
    swp.add_argument("--param", required=True, choices=("T", "N", "K"))
    swp.add_argument("--values", action="append", required=True,
                     help="sweep values; repeat or comma-separate")
    swp.set_defaults(func=_cmd_sweep)

    srv = subs.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
