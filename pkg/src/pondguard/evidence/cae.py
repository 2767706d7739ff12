"""Claims-arguments-evidence graph with hash-pinned evidence payloads."""

from __future__ import annotations

import copy
import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

log = logging.getLogger(__name__)


class HazardGroup(str, enum.Enum):
    NUCLEAR_RADIOLOGICAL = "nuclear_radiological"
    CONVENTIONAL = "conventional"
    PHYSICAL = "physical"
    CYBER_SECURITY = "cyber_security"


class NodeKind(str, enum.Enum):
    CLAIM = "claim"
    ARGUMENT = "argument"
    EVIDENCE = "evidence"


class CaeError(Exception):
    pass


class NodeNotFound(CaeError, KeyError):
    def __init__(self, node_id: str):
        super().__init__(f"no node with id {node_id!r}")
        self.node_id = node_id

    def __str__(self) -> str:
        return self.args[0]


class NotEvidenceNode(CaeError):
    def __init__(self, node_id: str, kind: NodeKind):
        super().__init__(f"node {node_id!r} is a {kind.value}, not an evidence node")
        self.node_id = node_id


class HashConflict(CaeError):
    def __init__(self, node_id: str, old: str, new: str):
        super().__init__(f"node {node_id!r} already holds sha256 {old[:12]}..., refusing {new[:12]}...")
        self.node_id = node_id
        self.old = old
        self.new = new


class InvalidGraph(CaeError):
    pass


@dataclass(frozen=True)
class EvidencePayload:
    path: str
    sha256: str
    timestamp: str

    @classmethod
    def for_file(cls, path: str | Path) -> "EvidencePayload":
        p = Path(path)
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        # mtime, so re-attaching an unchanged file yields an identical graph
        mtime = datetime.fromtimestamp(p.stat().st_mtime, tz=timezone.utc)
        return cls(str(path), digest, mtime.isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return {"path": self.path, "sha256": self.sha256, "timestamp": self.timestamp}


@dataclass
class CaeNode:
    id: str
    kind: NodeKind
    text: str
    hazard_group: HazardGroup | None = None
    children: list[str] = field(default_factory=list)
    evidence: EvidencePayload | None = None

    def to_dict(self) -> dict:
        d: dict = {"id": self.id, "kind": self.kind.value, "text": self.text}
        if self.hazard_group is not None:
            d["hazard_group"] = self.hazard_group.value
        d["children"] = list(self.children)
        if self.evidence is not None:
            d["evidence"] = self.evidence.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CaeNode":
        hg = d.get("hazard_group")
        ev = d.get("evidence")
        return cls(
            id=d["id"],
            kind=NodeKind(d["kind"]),
            text=d["text"],
            hazard_group=HazardGroup(hg) if hg is not None else None,
            children=list(d.get("children", [])),
            evidence=EvidencePayload(**ev) if ev is not None else None,
        )


@dataclass
class CaeGraph:
    nodes: dict[str, CaeNode]
    root: str = "C1"

    def __post_init__(self) -> None:
        self.validate()

    def node(self, node_id: str) -> CaeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NodeNotFound(node_id) from None

    def validate(self) -> None:
        if self.root not in self.nodes:
            raise InvalidGraph(f"root {self.root!r} is not a node")
        for n in self.nodes.values():
            for c in n.children:
                if c not in self.nodes:
                    raise InvalidGraph(f"{n.id} references missing child {c!r}")
            if n.kind is NodeKind.EVIDENCE and n.children:
                raise InvalidGraph(f"evidence node {n.id} has children")
            if n.kind is not NodeKind.EVIDENCE and n.evidence is not None:
                raise InvalidGraph(f"{n.kind.value} node {n.id} carries an evidence payload")
        # depth-first colouring for cycle detection
        colour: dict[str, int] = {}

        def visit(nid: str) -> None:
            colour[nid] = 1
            for c in self.nodes[nid].children:
                if colour.get(c) == 1:
                    raise InvalidGraph(f"cycle through {nid} -> {c}")
                if c not in colour:
                    visit(c)
            colour[nid] = 2

        for nid in self.nodes:
            if nid not in colour:
                visit(nid)

    def evidence_leaves(self) -> list[CaeNode]:
        return [n for n in self.walk() if n.kind is NodeKind.EVIDENCE]

    def missing(self) -> list[str]:
        return [n.id for n in self.evidence_leaves() if n.evidence is None]

    def complete(self) -> bool:
        return not self.missing()

    def walk(self) -> list[CaeNode]:
        """Nodes in depth-first pre-order from the root, each once."""
        seen: set[str] = set()
        out: list[CaeNode] = []

        def go(nid: str) -> None:
            if nid in seen:
                return
            seen.add(nid)
            out.append(self.nodes[nid])
            for c in self.nodes[nid].children:
                go(c)

        go(self.root)
        return out

    def render(self) -> str:
        lines: list[str] = []

        def go(nid: str, depth: int) -> None:
            n = self.nodes[nid]
            mark = ""
            if n.kind is NodeKind.EVIDENCE:
                mark = "✔ " if n.evidence is not None else "✘ "
            lines.append(f"{'  ' * depth}{mark}{n.id} [{n.kind.value}] {n.text}")
            for c in n.children:
                go(c, depth + 1)

        go(self.root, 0)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"nodes": [n.to_dict() for n in self.nodes.values()], "root": self.root}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CaeGraph":
        try:
            nodes = [CaeNode.from_dict(n) for n in d["nodes"]]
            root = d.get("root", "C1")
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGraph(f"malformed CAE graph: {exc}") from exc
        index: dict[str, CaeNode] = {}
        for n in nodes:
            if n.id in index:
                raise InvalidGraph(f"duplicate node id {n.id!r}")
            index[n.id] = n
        return cls(index, root)

    @classmethod
    def from_json(cls, text: str) -> "CaeGraph":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidGraph(f"CAE file is not JSON: {exc}") from exc
        return cls.from_dict(data)

    def structurally_equal(self, other: "CaeGraph") -> bool:
        return self.to_dict() == other.to_dict()


def load_graph(path: str | Path) -> CaeGraph:
    return CaeGraph.from_json(Path(path).read_text(encoding="utf-8"))


def attach_evidence(
    graph: CaeGraph, node_id: str, payload: EvidencePayload, *, force: bool = False
) -> CaeGraph:
    """Return a copy of graph with payload recorded on an evidence node."""
    node = graph.node(node_id)
    if node.kind is not NodeKind.EVIDENCE:
        raise NotEvidenceNode(node_id, node.kind)
    old = node.evidence
    if old is not None and old.sha256 != payload.sha256:
        if not force:
            raise HashConflict(node_id, old.sha256, payload.sha256)
        log.warning("revising %s: sha256 %s -> %s (%s)", node_id, old.sha256, payload.sha256, payload.path)
    out = copy.deepcopy(graph)
    out.nodes[node_id].evidence = payload
    return out


def default_cae_skeleton() -> CaeGraph:
    C, A, E = NodeKind.CLAIM, NodeKind.ARGUMENT, NodeKind.EVIDENCE
    H = HazardGroup
    nodes = [
        CaeNode("C1", C, "Robot is adequately safe to survey the nuclear waste storage pond",
                children=["C-nuclear", "C-conventional", "C-physical", "C-cyber"]),
        CaeNode("C-nuclear", C, "Nuclear (radiological) hazards are tolerable and ALARP",
                H.NUCLEAR_RADIOLOGICAL),
        CaeNode("C-conventional", C, "Conventional hazards are tolerable and ALARP", H.CONVENTIONAL,
                ["C-hydrogen"]),
        CaeNode("C-hydrogen", C, "Hydrogen explosion hazard is controlled", H.CONVENTIONAL),
        CaeNode("C-physical", C, "Physical hazards are tolerable and ALARP", H.PHYSICAL,
                ["C-collision", "C-propeller-splash", "C-irretrievable"]),
        CaeNode("C-collision", C, "Collision with pond contents is prevented", H.PHYSICAL,
                ["A-method1", "A-method2"]),
        CaeNode("C-propeller-splash", C, "Propeller splash hazard is controlled", H.PHYSICAL),
        CaeNode("C-irretrievable", C, "Robot remains retrievable", H.PHYSICAL),
        CaeNode("C-cyber", C, "Cyber security hazards are tolerable and ALARP", H.CYBER_SECURITY),
        CaeNode("A-method1", A, "Method 1 (engineered guard): whisker contacts open safety relays "
                "and remove propeller power", children=["E-guard-demands"]),
        CaeNode("A-method2", A, "Method 2 (verifiable AI): verified rules-based controller behind "
                "a 1oo2 voter and watchdog", children=["E-verify-collision", "E-campaign-collision"]),
        CaeNode("E-guard-demands", E, "Guard demand statistics from the simulation campaign"),
        CaeNode("E-verify-collision", E, "Model-checking report for the collision properties"),
        CaeNode("E-campaign-collision", E, "Monte Carlo campaign report for collision probability"),
    ]
    return CaeGraph({n.id: n for n in nodes}, "C1")
