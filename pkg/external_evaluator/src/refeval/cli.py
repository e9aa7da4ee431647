"""Reference evaluator CLI.

    refeval --mode train --datasets-dir data/            # stdio transport
    refeval --mode echo --shuffle 4                      # conformance echo
    refeval --mode train --port 9090                     # TCP transport
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from .server import echo_handler, serve_stdio, serve_tcp, training_handler


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="refeval", description=__doc__)
    parser.add_argument("--mode", choices=["train", "echo"], default="train")
    parser.add_argument("--device", default="cpu", help="torch device for training")
    parser.add_argument("--datasets-dir", help="directory holding <name>/{train,test}.tsv")
    parser.add_argument("--port", type=int, help="serve on TCP instead of stdio")
    parser.add_argument("--shuffle", type=int, default=0, metavar="N",
                        help="buffer up to N responses and emit them in reverse order")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="refeval: %(message)s")
    if args.mode == "echo":
        handler = echo_handler
    else:
        handler = training_handler(args.datasets_dir, args.device)
    if args.port is not None:
        serve_tcp(handler, args.port, args.shuffle)
    else:
        serve_stdio(handler, args.shuffle)
    return 0


if __name__ == "__main__":
    sys.exit(main())
