"""Pulse sequences, correction packages and their JSON form.

A sequence is an ordered tuple of exchange pulses on an ``n_spins`` register
together with a connectivity layout.  Under the ``linear`` layout every pulse
must act on neighbouring spins unless the sequence came out of the rewrite
engine, which may produce longer-range pulses on the way.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from xpulse.spin_system import MAX_SPINS, ExchangePulse, apply_sequence

Layout = Union[str, tuple]

# spin triples of the two encoded qubits on the six-spin register
QUBIT_TRIPLES = ((0, 1, 2), (3, 4, 5))


class SequenceFormatError(ValueError):
    """Malformed sequence document; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _normalize_layout(layout) -> Layout:
    if isinstance(layout, str):
        if layout not in ("linear", "complete"):
            raise ValueError(f"unknown layout {layout!r}")
        return layout
    if isinstance(layout, dict):
        layout = layout.get("edges")
        if layout is None:
            raise ValueError("explicit layout needs an 'edges' list")
    edges = []
    for e in layout:
        a, b = (int(x) for x in e)
        if a == b:
            raise ValueError(f"layout edge ({a}, {b}) is a self loop")
        edges.append((min(a, b), max(a, b)))
    return tuple(sorted(set(edges)))


def allowed(layout: Layout, i: int, j: int) -> bool:
    """True when the layout has a coupler between spins i and j."""
    pair = (min(i, j), max(i, j))
    if layout == "complete":
        return True
    if layout == "linear":
        return pair[1] - pair[0] == 1
    return pair in layout


@dataclass(frozen=True)
class PulseSequence:
    """Serial exchange pulses on ``n_spins`` spins; the first pulse acts first."""

    n_spins: int
    pulses: tuple = ()
    layout: Layout = "linear"
    rewritten: bool = False

    def __post_init__(self):
        n = int(self.n_spins)
        if not 1 <= n <= MAX_SPINS:
            raise ValueError(f"register size must be in [1, {MAX_SPINS}], got {n}")
        object.__setattr__(self, "n_spins", n)
        object.__setattr__(self, "layout", _normalize_layout(self.layout))
        pulses = tuple(p if isinstance(p, ExchangePulse) else ExchangePulse(*p) for p in self.pulses)
        for k, p in enumerate(pulses):
            if p.i >= n or p.j >= n:
                raise ValueError(f"pulse {k} ({p.i}, {p.j}) out of range for {n} spins")
            if not self.rewritten and not allowed(self.layout, p.i, p.j):
                raise ValueError(f"pulse {k} ({p.i}, {p.j}) not allowed by layout {self.layout!r}")
        object.__setattr__(self, "pulses", pulses)

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def __getitem__(self, k):
        return self.pulses[k]

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        if self.n_spins != other.n_spins:
            raise ValueError("cannot concatenate sequences on different registers")
        return self.with_pulses(self.pulses + other.pulses, rewritten=self.rewritten or other.rewritten)

    def with_pulses(self, pulses: Iterable, rewritten: bool | None = None) -> "PulseSequence":
        flag = self.rewritten if rewritten is None else rewritten
        return PulseSequence(self.n_spins, tuple(pulses), self.layout, flag)

    def unitary(self) -> np.ndarray:
        return apply_sequence(self.n_spins, self.pulses)

    def inverse(self) -> "PulseSequence":
        """Reversed sequence with every duration replaced by 2 - t."""
        return self.with_pulses(p.inverse() for p in reversed(self.pulses))

    def same_as(self, other: "PulseSequence", tol: float = 1e-12) -> bool:
        return (
            self.n_spins == other.n_spins
            and len(self) == len(other)
            and all(p.same_as(q, tol) for p, q in zip(self.pulses, other.pulses))
        )


def sequence(n_spins: int, pulses: Iterable, layout: Layout = "linear", rewritten: bool = False) -> PulseSequence:
    return PulseSequence(n_spins, tuple(pulses), layout, rewritten)


def pulse_count(seq: PulseSequence, mode: str = "all") -> int:
    """Number of pulses; ``non_swap`` skips SWAPs and zero-duration pulses."""
    if mode == "all":
        return len(seq.pulses)
    if mode == "non_swap":
        return sum(1 for p in seq.pulses if not (p.is_swap or p.is_zero))
    raise ValueError(f"unknown count mode {mode!r}")


def qubit_of(pulse: ExchangePulse, triples: Sequence[Sequence[int]] = QUBIT_TRIPLES) -> int | None:
    """Index of the encoded qubit containing both spins of ``pulse``, if any."""
    for k, triple in enumerate(triples):
        if pulse.i in triple and pulse.j in triple:
            return k
    return None


@dataclass(frozen=True)
class GateSequencePackage:
    """A two-qubit core with single-qubit correction pulses on either side."""

    core: PulseSequence
    pre: PulseSequence = field(default=None)
    post: PulseSequence = field(default=None)

    def __post_init__(self):
        n = self.core.n_spins
        for name in ("pre", "post"):
            part = getattr(self, name)
            if part is None:
                part = PulseSequence(n, (), self.core.layout)
                object.__setattr__(self, name, part)
            if part.n_spins != n:
                raise ValueError(f"{name} corrections act on {part.n_spins} spins, core on {n}")
            for k, p in enumerate(part.pulses):
                if qubit_of(p) is None:
                    raise ValueError(f"{name} correction {k} ({p.i}, {p.j}) is not a single-qubit pulse")

    @property
    def n_spins(self) -> int:
        return self.core.n_spins

    def full(self) -> PulseSequence:
        return self.pre + self.core + self.post

    def unitary(self) -> np.ndarray:
        return self.full().unitary()


# ---------------------------------------------------------------------------
# JSON


def _pulse_doc(p: ExchangePulse) -> dict:
    return {"i": p.i, "j": p.j, "t": p.t}


def _layout_doc(layout: Layout):
    return layout if isinstance(layout, str) else {"edges": [list(e) for e in layout]}


def to_document(obj: Union[PulseSequence, GateSequencePackage]) -> dict:
    core = obj.core if isinstance(obj, GateSequencePackage) else obj
    doc = {
        "n_spins": core.n_spins,
        "layout": _layout_doc(core.layout),
        "pulses": [_pulse_doc(p) for p in core.pulses],
    }
    if core.rewritten:
        doc["rewritten"] = True
    if isinstance(obj, GateSequencePackage):
        doc["corrections"] = {
            "pre": [_pulse_doc(p) for p in obj.pre.pulses],
            "post": [_pulse_doc(p) for p in obj.post.pulses],
        }
    return doc


def serialize(obj: Union[PulseSequence, GateSequencePackage]) -> str:
    """JSON text; floats use repr so durations survive a round trip exactly."""
    return json.dumps(to_document(obj), indent=1)


def _parse_pulses(items, n: int, where: str) -> list[ExchangePulse]:
    if not isinstance(items, list):
        raise SequenceFormatError(where, "expected a list of pulses")
    out = []
    for k, item in enumerate(items):
        here = f"{where}[{k}]"
        if not isinstance(item, dict):
            raise SequenceFormatError(here, "expected an object with keys i, j, t")
        for key in ("i", "j", "t"):
            if key not in item:
                raise SequenceFormatError(here, f"missing field {key!r}")
        i, j, t = item["i"], item["j"], item["t"]
        for key, val in (("i", i), ("j", j)):
            if isinstance(val, bool) or not isinstance(val, int):
                raise SequenceFormatError(f"{here}.{key}", f"spin index must be an integer, got {val!r}")
            if not 0 <= val < n:
                raise SequenceFormatError(f"{here}.{key}", f"spin index {val} out of range for {n} spins")
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not np.isfinite(t):
            raise SequenceFormatError(f"{here}.t", f"duration must be a finite number, got {t!r}")
        if i == j:
            raise SequenceFormatError(here, f"pulse acts on a single spin (i = j = {i})")
        out.append(ExchangePulse(i, j, t))
    return out


def from_document(doc) -> Union[PulseSequence, GateSequencePackage]:
    if not isinstance(doc, dict):
        raise SequenceFormatError("$", "top level must be an object")
    n = doc.get("n_spins")
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= MAX_SPINS:
        raise SequenceFormatError("n_spins", f"must be an integer in [1, {MAX_SPINS}], got {n!r}")
    try:
        layout = _normalize_layout(doc.get("layout", "linear"))
    except (ValueError, TypeError) as exc:
        raise SequenceFormatError("layout", str(exc)) from None
    rewritten = bool(doc.get("rewritten", False))
    pulses = _parse_pulses(doc.get("pulses"), n, "pulses")
    try:
        core = PulseSequence(n, tuple(pulses), layout, rewritten)
    except ValueError as exc:
        raise SequenceFormatError("pulses", str(exc)) from None
    corr = doc.get("corrections")
    if corr is None:
        return core
    if not isinstance(corr, dict):
        raise SequenceFormatError("corrections", "expected an object with 'pre' and 'post'")
    parts = {}
    for name in ("pre", "post"):
        items = _parse_pulses(corr.get(name, []), n, f"corrections.{name}")
        parts[name] = PulseSequence(n, tuple(items), layout, rewritten)
    try:
        return GateSequencePackage(core, parts["pre"], parts["post"])
    except ValueError as exc:
        raise SequenceFormatError("corrections", str(exc)) from None


def parse(text: str) -> Union[PulseSequence, GateSequencePackage]:
    """Parse a sequence document; packages come back when corrections are present."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceFormatError(f"line {exc.lineno}", exc.msg) from None
    return from_document(doc)
