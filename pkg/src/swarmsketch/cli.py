"""Command-line client.

Every subcommand except ``serve`` talks to the service API: against a
remote server when ``--server`` is given, otherwise against an in-process
application over an ASGI transport, so no daemon is needed for batch work.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .errors import SwarmSketchError
from .harness.episode import run_episode
from .harness.scenario import bundled_scenario_path, load_scenario


def _client(args) -> httpx.AsyncClient:
    if args.server:
        return httpx.AsyncClient(base_url=args.server, timeout=600.0)
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.AsyncClient(transport=transport, base_url="http://swarmsketch", timeout=600.0)


def _read_scenario_payload(path: str) -> dict:
    target = Path(path)
    if not target.exists():
        bundled = bundled_scenario_path(Path(path).stem)
        if bundled.exists():
            target = bundled
        else:
            raise SwarmSketchError(f"scenario not found: {path}")
    return json.loads(target.read_text())


async def _post(args, endpoint: str, payload: dict) -> dict:
    async with _client(args) as client:
        response = await client.post(endpoint, json=payload)
        if response.status_code != 200:
            detail = response.json().get("detail", response.text)
            raise SwarmSketchError(f"{endpoint} failed ({response.status_code}): {detail}")
        return response.json()


def cmd_plan(args) -> int:
    payload = _read_scenario_payload(args.scenario)
    result = asyncio.run(_post(args, "/api/plan", payload))
    print(f"plan: {len(result['steps'])} steps, total cost {result['total_cost']:.6g}")
    for index, step in enumerate(result["steps"], start=1):
        print(
            f"  step {index}: mode {step['mode']}  s={step['s']:.3f}  "
            f"theta={step['theta']:.4f}  c=({step['c'][0]:.2f}, {step['c'][1]:.2f})"
        )
    if args.out:
        Path(args.out).write_text(json.dumps(result, sort_keys=True))
        print(f"wrote {args.out}")
    return 0


def cmd_run(args) -> int:
    payload = _read_scenario_payload(args.scenario)
    if args.server:
        result = asyncio.run(_post(args, "/api/run", payload))
        converged = result["converged"]
        e_f, e_c = result["final_e_f"], result["final_e_c"]
        segments = result["segments"]
        print(f"run: {len(segments)} segments, converged={converged}, "
              f"final e_f={e_f:.3e} e_c={e_c:.3e}")
        if args.trace:
            Path(args.trace).write_text(json.dumps(result, sort_keys=True))
            print(f"wrote {args.trace}")
        return 0 if converged else 1
    # local runs keep the full deterministic trace for the JSONL format
    from .harness.scenario import scenario_from_dict

    scenario = scenario_from_dict(payload, source=args.scenario)
    trace = run_episode(scenario)
    e_f, e_c = trace.final_errors
    converged = all(s.converged for s in trace.segments)
    for index, seg in enumerate(trace.segments, start=1):
        print(
            f"  segment {index}: mode {trace.plan.steps[index - 1].mode} "
            f"steps={seg.steps_used} converged={seg.converged} "
            f"e_f={seg.e_f[-1]:.3e} e_c={seg.e_c[-1]:.3e}"
        )
    print(f"run: converged={converged}, final e_f={e_f:.3e} e_c={e_c:.3e} "
          f"({trace.wall_time_s:.2f}s)", file=sys.stderr)
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl())
        print(f"wrote {args.trace}")
    return 0 if converged else 1


def cmd_spectra(args) -> int:
    payload = _read_scenario_payload(args.scenario)
    result = asyncio.run(_post(args, "/api/spectra", payload))
    print(f"spectra for {result['agents']} agents (alpha={result['alpha']}, k_p={result['k_p']}):")
    print(f"  {'radius':>8}  {'lambda2':>10}  {'lambda2_N':>10}  {'lambda2_W':>10}  "
          f"{'connected':>9}  {'k_p_max':>9}  cert")
    for mode in result["modes"]:
        print(
            f"  {mode['radius']:>8.2f}  {mode['lambda2']:>10.4f}  "
            f"{mode['lambda2_normalized']:>10.4f}  {mode['lambda2_weighted']:>10.4f}  "
            f"{str(mode['connected']):>9}  {mode['k_p_max']:>9.4f}  "
            f"{'pass' if mode['certificate_passes'] else 'FAIL'}"
        )
    return 0


def cmd_decode(args) -> int:
    payload = json.loads(Path(args.session).read_text())
    result = asyncio.run(_post(args, "/api/decode", payload))
    acc = result["accuracy"]
    print(
        f"decode: {result['frames']} frames, accuracy "
        f"{'n/a' if acc is None else f'{acc:.1%}'}, "
        f"{len(result['log_likelihoods'])} EM iterations"
    )
    fired = [e for e in result["events"] if e["kind"] not in ("move", "none")]
    for event in fired:
        print(f"  {event['center_s']:7.2f}s  {event['kind']:>11}  "
              f"({event['x']:.3f}, {event['y']:.3f})")
    if args.out:
        Path(args.out).write_text(json.dumps(result, sort_keys=True))
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    host, _, port = args.addr.rpartition(":")
    scenario = load_scenario(args.scenario) if args.scenario else None
    app = create_app(
        scenario=scenario,
        stream_every=args.stream_every,
        static_dir=args.static,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmsketch",
        description="Formation-control workbench: plan, run, inspect and serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan_p = sub.add_parser("plan", help="plan intermediate formations for a scenario")
    plan_p.add_argument("scenario")
    plan_p.add_argument("--out", help="write the plan JSON here")
    plan_p.set_defaults(func=cmd_plan)

    run_p = sub.add_parser("run", help="plan and execute a scenario")
    run_p.add_argument("scenario")
    run_p.add_argument(
        "--trace",
        help="write the execution trace here (JSON-lines locally, JSON via --server)",
    )
    run_p.set_defaults(func=cmd_run)

    spectra_p = sub.add_parser("spectra", help="per-mode connectivity report")
    spectra_p.add_argument("scenario")
    spectra_p.set_defaults(func=cmd_spectra)

    decode_p = sub.add_parser("decode", help="decode a recorded signal session")
    decode_p.add_argument("session")
    decode_p.add_argument("--out", help="write the decode report here")
    decode_p.set_defaults(func=cmd_decode)

    serve_p = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    serve_p.add_argument("--addr", default="127.0.0.1:8000")
    serve_p.add_argument("--scenario", help="base scenario for sessions")
    serve_p.add_argument("--static", help="static assets directory (frontend build)")
    serve_p.add_argument("--stream-every", type=int, default=10)
    serve_p.set_defaults(func=cmd_serve)

    for name, sub_parser in sub.choices.items():
        if name != "serve":
            sub_parser.add_argument("--server", help="remote service URL (default: in-process)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SwarmSketchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
