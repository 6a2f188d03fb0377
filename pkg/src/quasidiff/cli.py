"""Command-line front end: a thin client of the service.

By default requests are dispatched to the in-process ASGI app (no network);
`--server URL` targets a running service instead.  Human-readable summaries
go to stdout, machine output (JSON/CSV) to --out.  Exit codes: 0 success,
1 validation/usage failure, 2 verification gate failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    async def go():
        from .service import app
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://quasidiff",
                                     timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _load_triple(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(1)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON in {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _fail_on_error(resp: httpx.Response) -> dict:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(1)
    return resp.json()


def _emit(doc, out: str | None, text: str | None = None):
    payload = doc if isinstance(doc, str) else json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(payload if payload.endswith("\n") else payload + "\n")
    elif text is None:
        print(payload)
    if text is not None:
        print(text)


def _parse_floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v != ""]


def main(argv=None) -> int:
    try:
        return _run(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        # argparse signals usage errors with 2, which is reserved here for
        # verification gate failures
        return 1 if code == 2 else code


def _run(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasidiff",
        description="Regularize, classify, solve and simulate scale/measure triples")
    parser.add_argument("--server", help="URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gallery", help="emit a named example triple as JSON")
    p.add_argument("name", choices=["regular_diffusion", "snapping_out", "random_walk",
                                    "birth_death", "cantor"])
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--levels", type=str, default="0,1,2")
    p.add_argument("--masses", type=str, default="1,1,1")
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--birth", type=str, default="1")
    p.add_argument("--death", type=str, default="1")
    p.add_argument("--q-max", type=int, default=40)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--variant", choices=["timechange", "bm_on_cantor"], default="timechange")
    p.add_argument("--l", type=str, default="-inf")
    p.add_argument("--r", type=str, default="inf")
    p.add_argument("--out")

    for name in ("regularize", "classify"):
        p = sub.add_parser(name, help=f"{name} a triple")
        p.add_argument("triple")
        p.add_argument("--out")

    p = sub.add_parser("energy", help="evaluate both energies of a function")
    p.add_argument("triple")
    p.add_argument("function", help="JSON file: {'host': ...} or {'components': ...}")
    p.add_argument("--out")

    p = sub.add_parser("exit", help="exact hitting/exit quantities on a window")
    p.add_argument("triple")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="sample paths of the regularized process")
    p.add_argument("triple")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float)
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads (0 = available parallelism)")
    p.add_argument("--project", action="store_true",
                   help="add the unregularized coordinate column")
    p.add_argument("--out", help="write the event CSV here")
    p.add_argument("--summary-out", help="write the JSON summary here")

    p = sub.add_parser("verify", help="run a Monte Carlo verification suite")
    p.add_argument("triple")
    p.add_argument("--suite", default="all",
                   choices=["hitting", "exit", "speed", "jumps", "martingale", "all"])
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float)
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads (0 = available parallelism)")
    p.add_argument("--out")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "gallery":
        params: dict = {}
        if args.name == "snapping_out":
            params = {"kappa": args.kappa}
        elif args.name == "random_walk":
            params = {"levels": _parse_floats(args.levels),
                      "masses": _parse_floats(args.masses), "p": args.p}
        elif args.name == "birth_death":
            params = {"birth": _parse_floats(args.birth),
                      "death": _parse_floats(args.death), "q_max": args.q_max}
        elif args.name == "cantor":
            params = {"depth": args.depth, "variant": args.variant}
        elif args.name == "regular_diffusion":
            params = {"l": args.l, "r": args.r}
        doc = _fail_on_error(_post(args.server, "/gallery", {"name": args.name, "params": params}))
        _emit(doc["triple"], args.out)
        if doc.get("uniqueness"):
            print("uniqueness report: " + json.dumps(doc["uniqueness"], sort_keys=True),
                  file=sys.stderr)
        return 0

    triple_doc = _load_triple(args.triple)

    if args.command in ("regularize", "classify"):
        doc = _fail_on_error(_post(args.server, f"/{args.command}", {"triple": triple_doc}))
        if args.command == "regularize" and not doc.get("valid", True):
            _emit(doc, args.out)
            print("triple fails validation:", file=sys.stderr)
            for c in doc["clauses"]:
                if not c["passed"]:
                    print(f"  {c['name']}: {c['witness']}", file=sys.stderr)
            return 1
        _emit(doc, args.out)
        return 0

    if args.command == "energy":
        fn_doc = _load_triple(args.function)
        doc = _fail_on_error(_post(args.server, "/energy",
                                   {"triple": triple_doc, "function": fn_doc}))
        _emit(doc, args.out)
        return 0

    if args.command == "exit":
        doc = _fail_on_error(_post(args.server, "/exit", {
            "triple": triple_doc, "a": args.a, "b": args.b, "x": args.x,
            "delta": args.delta}))
        _emit(doc, args.out)
        return 0

    if args.command == "simulate":
        doc = _fail_on_error(_post(args.server, "/simulate", {
            "triple": triple_doc, "x0": args.x0, "horizon": args.horizon,
            "paths": args.paths, "seed": args.seed, "delta": args.delta,
            "project": args.project, "threads": args.threads}))
        summary = doc["summary"]
        if args.out:
            Path(args.out).write_text(doc["csv"])
        else:
            sys.stdout.write(doc["csv"])
        if args.summary_out:
            Path(args.summary_out).write_text(
                json.dumps(summary, indent=2, sort_keys=True) + "\n")
        print(f"simulated {summary['paths']} paths from {summary['x0_used']} "
              f"(seed {summary['seed']}, delta {summary['delta']:.6g}); "
              f"absorbed {summary['absorbed']}, truncated {summary['truncated']}",
              file=sys.stderr)
        return 0

    if args.command == "verify":
        doc = _fail_on_error(_post(args.server, "/verify", {
            "triple": triple_doc, "suite": args.suite, "paths": args.paths,
            "seed": args.seed, "delta": args.delta, "threads": args.threads}))
        _emit(doc, args.out)
        for c in doc["checks"]:
            status = "pass" if c["passed"] else "FAIL"
            print(f"[{status}] {c['name']}: estimate {c['estimate']:.6g} "
                  f"vs {c['reference']:.6g} (z = {c['z']:.2f})", file=sys.stderr)
        if "speed_recovery" in doc:
            sr = doc["speed_recovery"]
            status = "pass" if sr["passed"] else "FAIL"
            errs = [lv["mean_rel_error"] for lv in sr["levels"]]
            print(f"[{status}] speed_recovery: per-atom errors {errs}", file=sys.stderr)
        return 0 if doc["passed"] else 2

    parser.error(f"unknown command {args.command}")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
