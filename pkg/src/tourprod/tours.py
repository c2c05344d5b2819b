"""The target quantity: which tour, in which dimension."""

import enum
import re
from dataclasses import dataclass

from .errors import DomainError


class Topology(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


_SPEC_RE = re.compile(
    r"^\s*(?:(?P<sym>mu|nu)\s*[\[(_]?)?\s*(?P<d>\d+)\s*[,_]\s*(?P<n>\d+)\s*[\])]?"
    r"\s*(?:,\s*(?P<topo>open|closed))?\s*$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class TourSpec:
    """A tour over Gaussian points in R^d with ``n`` steps.

    Open tours visit ``n + 1`` points and have expectation ``mu[d,n]``;
    closed tours visit ``n`` points and return to the first (``nu[d,n]``).
    """

    d: int
    n: int
    topology: Topology = Topology.OPEN

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be an integer >= 1, got {self.d!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"step count must be an integer >= 1, got {self.n!r}")
        if self.topology is Topology.CLOSED and self.n < 2:
            raise DomainError("a closed tour needs at least 2 steps")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))

    @property
    def closed(self):
        return self.topology is Topology.CLOSED

    @property
    def n_points(self):
        return self.n if self.closed else self.n + 1

    @property
    def symbol(self):
        return f"{'nu' if self.closed else 'mu'}[{self.d},{self.n}]"

    def __str__(self):
        return self.symbol

    @classmethod
    def parse(cls, text):
        """Parse ``"mu[2,3]"``, ``"nu_3_4"`` or ``"2,4,closed"``."""
        m = _SPEC_RE.match(text)
        if m is None:
            raise DomainError(f"cannot parse tour spec {text!r}")
        sym, topo = m.group("sym"), m.group("topo")
        if sym and topo:
            implied = "closed" if sym.lower() == "nu" else "open"
            if implied != topo.lower():
                raise DomainError(f"{text!r}: symbol and topology disagree")
        if topo is None:
            topo = "closed" if (sym or "mu").lower() == "nu" else "open"
        return cls(int(m.group("d")), int(m.group("n")), Topology(topo.lower()))

    def to_dict(self):
        return {"d": self.d, "n": self.n, "topology": self.topology.value}

    @classmethod
    def from_dict(cls, data):
        return cls(data["d"], data["n"], Topology(data["topology"]))
