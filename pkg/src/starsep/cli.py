"""Command-line front end, a thin client over the service handlers.

Without `--server` the request models are executed in-process; with
`--server URL` the same JSON payload is POSTed to a running instance.
Inline flags override values from a JSON config file (`--config`).

Exit codes: 0 success (and all verify checks passed), 1 verify failures,
2 configuration or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from pydantic import ValidationError

from .exprparse import ExpressionError
from .service import (
    GeomRequest,
    LSymbolRequest,
    StarRequest,
    TensorTRequest,
    VerifyRequest,
    run_geom,
    run_lsymbol,
    run_star,
    run_tensor_t,
    run_verify,
)

_COMMANDS = {
    "star": (StarRequest, run_star, "/v1/star"),
    "lsymbol": (LSymbolRequest, run_lsymbol, "/v1/lsymbol"),
    "tensor-t": (TensorTRequest, run_tensor_t, "/v1/tensor-t"),
    "geom": (GeomRequest, run_geom, "/v1/geom"),
    "verify": (VerifyRequest, run_verify, "/v1/verify"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starsep",
        description="Exact star products with separation of variables on a pseudo-Kähler chart.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file mirroring the job options")
        p.add_argument("--potential", help="builtin name or expression")
        p.add_argument("--n", type=int, help="chart dimension")
        p.add_argument("--nu-order", type=int, dest="nu_order", help="truncation order in nu")
        p.add_argument("--jet-order", type=int, dest="jet_order", help="validity order of reported jets")
        p.add_argument(
            "--phi-order",
            type=int,
            dest="phi_order",
            help="override the potential expansion order (default jet_order + 2*nu_order + 4)",
        )
        p.add_argument("--seed", type=int, help="seed for randomized checks")
        p.add_argument("--server", help="base URL of a running service; default is in-process")

    p_star = sub.add_parser("star", help="compute f * g through nu^N")
    common(p_star)
    p_star.add_argument("--f", help="left factor expression")
    p_star.add_argument("--g", help="right factor expression")

    p_lsym = sub.add_parser("lsymbol", help="symbol of the left multiplication operator by f")
    common(p_lsym)
    p_lsym.add_argument("--f", help="function expression")

    p_tensor = sub.add_parser("tensor-t", help="invariant total-symbol tensor through nu^N")
    common(p_tensor)
    p_tensor.add_argument(
        "--at-origin",
        action="store_true",
        dest="at_origin",
        help="report only the constant coefficients",
    )

    p_geom = sub.add_parser("geom", help="metric, connection and curvature tensors")
    common(p_geom)

    p_verify = sub.add_parser("verify", help="run the full verification suite")
    common(p_verify)
    p_verify.add_argument("--f", help="optional associativity test function")
    p_verify.add_argument("--g", help="optional associativity test function")
    p_verify.add_argument("--h", help="optional associativity test function")

    return parser


def _collect_options(args: argparse.Namespace) -> dict:
    options: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must contain a JSON object")
        options.update(loaded)
    for key in ("potential", "n", "nu_order", "jet_order", "phi_order", "seed",
                "f", "g", "h", "at_origin"):
        value = getattr(args, key, None)
        if value is not None and value is not False:
            options[key] = value
    options.pop("server", None)
    return options


def run_command(argv: list[str]) -> int:
    """Parse argv, execute the job, print JSON to stdout; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    request_cls, handler, path = _COMMANDS[args.command]
    try:
        options = _collect_options(args)
        request = request_cls(**options)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.server:
            import httpx

            response = httpx.post(
                args.server.rstrip("/") + path,
                json=request.model_dump(),
                timeout=600.0,
            )
            if response.status_code >= 400:
                print(f"error: server returned {response.status_code}: {response.text}",
                      file=sys.stderr)
                return 2
            payload = response.json()
        else:
            payload = handler(request).model_dump()
    except (ExpressionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(json.dumps(payload, indent=2))
    if args.command == "verify" and not payload.get("passed", False):
        return 1
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
