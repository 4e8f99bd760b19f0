"""Command-line front end.

Subcommands: simulate, exact, moments, asympt, verify, report.  Results are
wrapped in a small envelope (tool version, echoed config, timestamp,
payload, diagnostics) and written as JSON or CSV.  Output is byte-stable
for a fixed command line and seed: floats use shortest round-trip repr,
keys are sorted, and the timestamp honours SOURCE_DATE_EPOCH so archived
runs can be reproduced bit for bit.

Exit codes: 0 success, 1 a requested tolerance or verification failed,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import exact, moments, simulate, verify
from .model import ProcessParams

__all__ = ["main", "build_envelope", "render"]

_OUTPUT_DIR_ENV = "SPACINGS_OUT_DIR"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch is not None
        else datetime.now(tz=timezone.utc)
    )
    return moment.isoformat()


def build_envelope(tool: str, config: dict, payload: Any, diagnostics: dict | None = None) -> dict:
    return {
        "tool": f"spacings {tool}",
        "version": __version__,
        "timestamp": _timestamp(),
        "config": config,
        "payload": payload,
        "diagnostics": diagnostics or {},
    }


def _csv_rows(tool: str, payload: Any) -> tuple[list[str], list[list]]:
    """Flatten a payload into (header, rows); schema documented per tool."""
    if tool == "exact":
        header = ["counts", "hats", "prob_num", "prob_den", "prob"]
        rows = [
            ["|".join(map(str, r["counts"])), r["hats"], r["prob_num"], r["prob_den"], repr(r["prob"])]
            for r in payload["states"]
        ]
        return header, rows
    if tool == "simulate":
        header = ["quantity", "i", "j", "order", "value"]
        rows: list[list] = []
        for i, v in enumerate(payload["mean"], start=1):
            rows.append(["mean", i, "", "", repr(v)])
        for i, v in enumerate(payload["mean_se"], start=1):
            rows.append(["mean_se", i, "", "", repr(v)])
        for i, row in enumerate(payload["cov"], start=1):
            for j, v in enumerate(row, start=1):
                rows.append(["cov", i, j, "", repr(v)])
        for m, v in enumerate(payload["std_moments"]):
            rows.append(["std_moment", "", "", m, repr(v)])
        for m, v in enumerate(payload["std_moment_se"]):
            rows.append(["std_moment_se", "", "", m, repr(v)])
        return header, rows
    if tool == "moments":
        header = ["table", "n", "i", "j", "order", "value"]
        rows = []
        for entry in payload["tables"]:
            rows.extend(entry_rows(entry))
        return header, rows
    if tool in ("asympt", "report"):
        header = ["k", "quantity", "route", "i", "j", "value"]
        rows = []
        blocks = payload["constants"] if tool == "report" else [payload]
        for block in blocks:
            k = block["k"]
            for route in ("quadrature", "extrapolation"):
                if route not in block:
                    continue
                c = block[route]
                for i, v in enumerate(c["rates"], start=1):
                    rows.append([k, "rate", route, i, "", repr(v)])
                for i, row in enumerate(c["cov_rates"], start=1):
                    for j, v in enumerate(row, start=1):
                        rows.append([k, "cov_rate", route, i, j, repr(v)])
                rows.append([k, "vacancy_rate", route, "", "", repr(c["vacancy_rate"])])
        return header, rows
    if tool == "verify":
        header = ["name", "passed", "measured", "elapsed_s"]
        rows = [[r["name"], r["passed"], r["measured"], repr(r["elapsed_s"])] for r in payload["checks"]]
        return header, rows
    raise ValueError(f"no CSV schema for tool {tool}")


def entry_rows(entry: dict) -> list[list]:
    rows = []
    table = entry["table"]
    arr = entry["values"]
    if table in ("mean", "mean_rate"):
        for n, row in enumerate(arr):
            for i, v in enumerate(row, start=1):
                rows.append([table, n, i, "", "", repr(v)])
    elif table in ("second", "cov"):
        for n, mat in enumerate(arr):
            for i, row in enumerate(mat, start=1):
                for j, v in enumerate(row, start=1):
                    rows.append([table, n, i, j, "", repr(v)])
    else:  # raw / standardized projected moments
        for n, row in enumerate(arr):
            for m, v in enumerate(row):
                rows.append([table, n, "", "", m, repr(v)])
    return rows


def render(envelope: dict, fmt: str) -> str:
    """Serialize an envelope; JSON carries provenance, CSV the payload only."""
    if fmt == "json":
        return json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    tool = envelope["tool"].split()[-1]
    header, rows = _csv_rows(tool, envelope["payload"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(envelope: dict, out: str | None, fmt: str) -> None:
    text = render(envelope, fmt)
    if out is None:
        sys.stdout.write(text)
        return
    base = os.environ.get(_OUTPUT_DIR_ENV)
    path = os.path.join(base, out) if base and not os.path.isabs(out) else out
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output file (relative paths join ${_OUTPUT_DIR_ENV} if set)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spacings", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo batch statistics")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--k", type=int, required=True)
    sim.add_argument("--replications", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--projection", help="comma-separated weights, length k-1")
    sim.add_argument("--order", type=int, default=8, help="highest standardized moment")
    sim.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    _add_common(sim)

    ex = sub.add_parser("exact", help="exact terminal-state distribution")
    ex.add_argument("--n", type=int, required=True)
    ex.add_argument("--k", type=int, required=True)
    ex.add_argument("--method", choices=("split", "direct"), default="split")
    ex.add_argument("--cap", type=int, help="override the size cap")
    ex.add_argument(
        "--compare",
        action="store_true",
        help="run both methods; nonzero total variation exits 1",
    )
    _add_common(ex)

    mo = sub.add_parser("moments", help="finite-n moment tables")
    mo.add_argument("--k", type=int, required=True)
    mo.add_argument("--n-max", type=int, required=True)
    mo.add_argument("--tables", default="mean,cov", help="subset of mean,cov,projected")
    mo.add_argument("--projection", help="comma-separated weights, length k-1")
    mo.add_argument("--order", type=int, default=8)
    _add_common(mo)

    ay = sub.add_parser("asympt", help="limiting constants by both routes")
    ay.add_argument("--k", type=int, required=True)
    ay.add_argument("--nodes", type=int, default=asy.DEFAULT_OUTER_NODES)
    ay.add_argument("--inner-nodes", type=int, default=asy.DEFAULT_INNER_NODES)
    ay.add_argument("--n-max", type=int, default=300, help="extrapolation table depth")
    _add_common(ay)

    ve = sub.add_parser("verify", help="run the full verification suite")
    ve.add_argument("--quick", action="store_true", help="smoke-scale sampling checks")
    _add_common(ve)

    re = sub.add_parser("report", help="constants table for a range of k")
    re.add_argument("--k-max", type=int, default=8)
    re.add_argument("--n-max", type=int, default=300)
    _add_common(re)
    return p


def _parse_projection(text: str | None, k: int) -> tuple[float, ...] | None:
    if text is None:
        return None
    values = tuple(float(v) for v in text.split(","))
    if len(values) != k - 1:
        raise SystemExit(f"error: projection needs {k - 1} entries, got {len(values)}")
    return values


def _constants_obj(c: asy.AsymptoticConstants) -> dict:
    return {
        "rates": c.rates.tolist(),
        "cov_rates": c.cov_rates.tolist(),
        "vacancy_rate": c.vacancy_rate,
        "identity_gap": c.identity_gap(),
        "diagnostics": c.diagnostics,
    }


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = ProcessParams(args.n, args.k)
    config = simulate.SimConfig(
        params=params,
        replications=args.replications,
        seed=args.seed,
        projection=_parse_projection(args.projection, args.k),
        moment_order=args.order,
    )
    stats = simulate.simulate_batch(config, threads=max(1, args.threads))
    payload = stats.to_obj()
    env = build_envelope(
        "simulate",
        {
            "n": args.n,
            "k": args.k,
            "replications": args.replications,
            "seed": args.seed,
            "projection": payload["projection"],
            "order": args.order,
            "threads": args.threads,
        },
        payload,
        {"rng": stats.rng_id},
    )
    _write(env, args.out, args.format)
    return 0


def _cmd_exact(args: argparse.Namespace) -> int:
    params = ProcessParams(args.n, args.k)
    kw = {} if args.cap is None else {"cap": args.cap}
    code = 0
    diagnostics: dict[str, Any] = {}
    if args.compare:
        a = exact.pmf_split(params, **kw)
        b = exact.pmf_direct(params, **kw)
        tv = a.total_variation(b)
        diagnostics = {
            "total_variation": float(tv),
            "total_variation_exact": f"{tv.numerator}/{tv.denominator}",
            "methods_agree": tv == 0,
        }
        payload = {"states": a.to_rows()}
        if tv != 0:
            code = 1
    else:
        fn = exact.pmf_split if args.method == "split" else exact.pmf_direct
        pmf = fn(params, **kw)
        payload = {"states": pmf.to_rows()}
    env = build_envelope(
        "exact",
        {"n": args.n, "k": args.k, "method": args.method, "compare": args.compare},
        payload,
        diagnostics,
    )
    _write(env, args.out, args.format)
    return code


def _cmd_moments(args: argparse.Namespace) -> int:
    wanted = [t.strip() for t in args.tables.split(",") if t.strip()]
    unknown = set(wanted) - {"mean", "cov", "projected"}
    if unknown:
        raise SystemExit(f"error: unknown tables {sorted(unknown)}")
    k, n_max = args.k, args.n_max
    tables = []
    mean_table = moments.mean_recursion(k, n_max)
    if "mean" in wanted:
        tables.append({"table": "mean", "values": mean_table.values.tolist()})
    if "cov" in wanted:
        cross = moments.cross_moment_recursion(k, n_max, mean_table)
        tables.append({"table": "cov", "values": cross.cov.tolist()})
    if "projected" in wanted:
        proj = _parse_projection(args.projection, k) or tuple([1.0] * (k - 1))
        pt = moments.projected_moment_recursion(proj, k, n_max, args.order)
        tables.append({"table": "raw", "values": pt.raw.tolist()})
        tables.append({"table": "standardized", "values": pt.standardized.tolist()})
    env = build_envelope(
        "moments",
        {
            "k": k,
            "n_max": n_max,
            "tables": wanted,
            "projection": args.projection,
            "order": args.order,
        },
        {"tables": tables},
    )
    _write(env, args.out, args.format)
    return 0


def _cmd_asympt(args: argparse.Namespace) -> int:
    quad = asy.constants_by_quadrature(args.k, args.nodes, args.inner_nodes)
    ext = asy.constants_by_extrapolation(args.k, args.n_max)
    payload = {
        "k": args.k,
        "quadrature": _constants_obj(quad),
        "extrapolation": _constants_obj(ext),
        "route_gap": {
            "rates": float(np.abs(quad.rates - ext.rates).max()),
            "cov_rates": float(np.abs(quad.cov_rates - ext.cov_rates).max()),
        },
    }
    env = build_envelope(
        "asympt",
        {"k": args.k, "nodes": args.nodes, "inner_nodes": args.inner_nodes, "n_max": args.n_max},
        payload,
    )
    _write(env, args.out, args.format)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = verify.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if args.out:
        payload = {
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "measured": r.measured,
                    "elapsed_s": r.elapsed_s,
                }
                for r in results
            ]
        }
        env = build_envelope("verify", {"quick": args.quick}, payload)
        _write(env, args.out, args.format)
    return 0 if not failed else 1


def _cmd_report(args: argparse.Namespace) -> int:
    blocks = []
    for k in range(2, args.k_max + 1):
        quad = asy.constants_by_quadrature(k)
        ext = asy.constants_by_extrapolation(k, args.n_max)
        blocks.append(
            {
                "k": k,
                "quadrature": _constants_obj(quad),
                "extrapolation": _constants_obj(ext),
                "route_gap": {
                    "rates": float(np.abs(quad.rates - ext.rates).max()),
                    "cov_rates": float(np.abs(quad.cov_rates - ext.cov_rates).max()),
                },
            }
        )
    env = build_envelope(
        "report", {"k_max": args.k_max, "n_max": args.n_max}, {"constants": blocks}
    )
    _write(env, args.out, args.format)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "exact": _cmd_exact,
        "moments": _cmd_moments,
        "asympt": _cmd_asympt,
        "verify": _cmd_verify,
        "report": _cmd_report,
    }
    try:
        return handlers[args.cmd](args)
    except (ValueError, exact.CapExceededError, OverflowError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
