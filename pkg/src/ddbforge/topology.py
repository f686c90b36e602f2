"""Distribution sites and the DB-link graph between them.

The topology document is JSON: ``{"sites": [{...}, ...]}`` where each site
object carries ``name`` (logical name), ``host``, optional ``port`` (default
1521), optional ``service`` (defaults to the logical name), optional
``dblink`` (defaults to the logical name) and the link credentials ``user``
and ``password``. Generated scripts embed credentials verbatim; pass
``redact=True`` to the code generator to mask them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .diagnostics import ERROR, WARNING, Diagnostic
from .errors import TopologyError

DEFAULT_PORT = 1521


@dataclass(frozen=True)
class Site:
    logical_name: str
    network_address: str
    port: int = DEFAULT_PORT
    service_name: str = ""
    dblink_name: str = ""
    user: str = ""
    secret: str = ""

    def __post_init__(self) -> None:
        if not self.logical_name:
            raise TopologyError("site logical name must be non-empty")
        if not self.service_name:
            object.__setattr__(self, "service_name", self.logical_name)
        if not self.dblink_name:
            object.__setattr__(self, "dblink_name", self.logical_name)


@dataclass(frozen=True)
class Topology:
    sites: tuple[Site, ...]

    def __post_init__(self) -> None:
        if not self.sites:
            raise TopologyError("topology needs at least one site")

    def site(self, logical_name: str) -> Site:
        for s in self.sites:
            if s.logical_name == logical_name:
                return s
        raise KeyError(f"topology has no site {logical_name}")

    def __contains__(self, logical_name: str) -> bool:
        return any(s.logical_name == logical_name for s in self.sites)

    @property
    def site_names(self) -> tuple[str, ...]:
        return tuple(s.logical_name for s in self.sites)

    def outbound_link_count(self) -> int:
        """Number of DB links each site must create: one per other site."""
        return len(self.sites) - 1


def validate_topology(topology: Topology) -> list[Diagnostic]:
    """Deterministic diagnostics over a constructed topology."""
    out: list[Diagnostic] = []
    seen_names: set[str] = set()
    seen_links: set[str] = set()
    for site in topology.sites:
        if site.logical_name in seen_names:
            out.append(
                Diagnostic(ERROR, "duplicate-site", f"duplicate site logical name {site.logical_name}")
            )
        seen_names.add(site.logical_name)
        if site.dblink_name in seen_links:
            out.append(
                Diagnostic(ERROR, "duplicate-dblink", f"duplicate DB link name {site.dblink_name}")
            )
        seen_links.add(site.dblink_name)
        if not (1 <= site.port <= 65535):
            out.append(
                Diagnostic(
                    ERROR,
                    "invalid-port",
                    f"site {site.logical_name}: port {site.port} outside [1, 65535]",
                )
            )
    if len(topology.sites) == 1:
        out.append(
            Diagnostic(
                WARNING,
                "single-site",
                "topology has a single site; the distribution is degenerate",
            )
        )
    return out


def topology_from_json(doc: dict) -> Topology:
    """Build a topology from its JSON document form."""
    if not isinstance(doc, dict) or "sites" not in doc:
        raise TopologyError('topology document must be an object with a "sites" array')
    sites = []
    for i, sdoc in enumerate(doc["sites"]):
        if not isinstance(sdoc, dict):
            raise TopologyError(f"sites[{i}] must be an object")
        unknown = set(sdoc) - {"name", "host", "port", "service", "dblink", "user", "password"}
        if unknown:
            raise TopologyError(f"sites[{i}]: unknown fields {sorted(unknown)}")
        for req in ("name", "host", "user", "password"):
            if req not in sdoc:
                raise TopologyError(f"sites[{i}]: missing required field {req!r}")
        port = sdoc.get("port", DEFAULT_PORT)
        if not isinstance(port, int) or isinstance(port, bool):
            raise TopologyError(f"sites[{i}]: port must be an integer")
        sites.append(
            Site(
                logical_name=str(sdoc["name"]).upper(),
                network_address=str(sdoc["host"]),
                port=port,
                service_name=str(sdoc.get("service", "")),
                dblink_name=str(sdoc.get("dblink", "")).upper(),
                user=str(sdoc["user"]),
                secret=str(sdoc["password"]),
            )
        )
    return Topology(sites=tuple(sites))


def topology_to_json(topology: Topology) -> dict:
    return {
        "sites": [
            {
                "name": s.logical_name,
                "host": s.network_address,
                "port": s.port,
                "service": s.service_name,
                "dblink": s.dblink_name,
                "user": s.user,
                "password": s.secret,
            }
            for s in topology.sites
        ]
    }


def load_topology(path: str) -> Topology:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"{path}: not valid JSON: {exc}") from exc
    return topology_from_json(doc)
