"""Command-line entry point: configure, load, serve."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config, make_model
from .server import NliService, make_server

logger = logging.getLogger("nli_sidecar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nli-sidecar",
        description="Serve three-way NLI probabilities over HTTP "
                    "(POST /nli, GET /health).",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--model",
                        help="'lexical-overlap' or a three-way NLI checkpoint "
                             "(hub name or local directory)")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--max-seq-len", type=int, dest="max_seq_len")
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--max-request-pairs", type=int,
                        dest="max_request_pairs")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else
        logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    overrides = {
        "model": args.model,
        "host": args.host,
        "port": args.port,
        "max_seq_len": args.max_seq_len,
        "batch_size": args.batch_size,
        "max_request_pairs": args.max_request_pairs,
    }
    try:
        config = load_config(args.config, overrides)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    service = NliService(make_model(config),
                         max_request_pairs=config.max_request_pairs)
    service.start_loading()
    server = make_server(service, config.host, config.port)
    host, port = server.server_address[:2]
    logger.info("serving %s on http://%s:%s", config.model, host, port)
    print(f"listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("shutting down")
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
