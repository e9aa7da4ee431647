"""Reference out-of-process fitness evaluator for the evaluation wire protocol."""

__version__ = "0.1.0"

from .glove import GloveError, load_glove
from .protocol import PROTOCOL_VERSION, RequestError, parse_request, validate_graph
from .server import echo_handler, serve_stdio, serve_tcp

__all__ = [
    "GloveError",
    "PROTOCOL_VERSION",
    "RequestError",
    "echo_handler",
    "load_glove",
    "parse_request",
    "serve_stdio",
    "serve_tcp",
    "validate_graph",
]
