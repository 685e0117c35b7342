"""Automata with boundary: composition, deadlock search and simulations."""

import json

from ._awb import (
    Automaton,
    InputError,
    ModelFile,
    ResourceError,
    System,
    ack_protocol,
    bind,
    evaluate,
    feedback,
    isomorphic,
    language_equivalent,
    linearize,
    load_model,
    opposite,
    parse_model,
    philosophers,
    product,
    reachable,
    scheduler,
    token_ring,
)


def check(system, algo="bfs", mode="all", max_states=0, witnesses=False, threads=1, stable=False):
    """Deadlock report of `system` as a dict (the CLI's JSON schema)."""
    return json.loads(system.check_json(algo, mode, max_states, witnesses, threads, stable))


__all__ = [
    "Automaton",
    "InputError",
    "ModelFile",
    "ResourceError",
    "System",
    "ack_protocol",
    "bind",
    "check",
    "evaluate",
    "feedback",
    "isomorphic",
    "language_equivalent",
    "linearize",
    "load_model",
    "opposite",
    "parse_model",
    "philosophers",
    "product",
    "reachable",
    "scheduler",
    "token_ring",
]
