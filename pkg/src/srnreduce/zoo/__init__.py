"""Bundled example networks, loadable as ``zoo:NAME``."""
from importlib import resources

from ..dsl import parse_network

# name -> (non-interacting species, fast set: "marked" uses the file's fast flags)
PARTITIONS = {
    "intro": ("U1",),
    "mm2": ("EA", "EAB"),
    "mm2-partial-fast": ("EA", "EAB"),
    "inhibition": ("ES", "EI", "ESI"),
    "allosteric": ("ER", "ERS"),
    "suicide": ("X", "Y"),
    "suicide-recycling": ("X", "Y"),
    "counter1": ("U1",),
    "counter2": ("U1",),
    "blocked": ("U",),
    "s6-nonexample": ("U1", "U2"),
    "ex311": ("U1",),
}


def names() -> list:
    return sorted(PARTITIONS)


def source(name: str) -> str:
    if name not in PARTITIONS:
        raise KeyError(f"unknown zoo network {name!r}; available: {', '.join(names())}")
    return resources.files(__name__).joinpath(f"{name}.rn").read_text(encoding="utf-8")


def load(name: str):
    """Return ``(network, U)`` for a bundled example."""
    return parse_network(source(name)), PARTITIONS[name]
