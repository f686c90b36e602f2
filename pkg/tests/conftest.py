import json
from pathlib import Path

import pytest

from ddbforge.ddl import parse_ddl
from ddbforge.fragmenter import plan_tables
from ddbforge.policy import load_policy
from ddbforge.simulator import load_dataset
from ddbforge.topology import load_topology

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def library_schema():
    return parse_ddl((FIXTURES / "library.sql").read_text())


@pytest.fixture(scope="session")
def library_topology():
    return load_topology(str(FIXTURES / "topology.json"))


@pytest.fixture(scope="session")
def library_policy(library_schema, library_topology):
    return load_policy(str(FIXTURES / "policy.json"), library_schema, library_topology)


@pytest.fixture(scope="session")
def library_plan(library_schema, library_topology, library_policy):
    return plan_tables(library_schema, library_topology, library_policy)


@pytest.fixture(scope="session")
def library_dataset(library_schema):
    doc = json.loads((FIXTURES / "data.json").read_text())
    return load_dataset(doc, library_schema)


@pytest.fixture()
def fixture_paths():
    return {
        "schema": str(FIXTURES / "library.sql"),
        "topology": str(FIXTURES / "topology.json"),
        "policy": str(FIXTURES / "policy.json"),
        "data": str(FIXTURES / "data.json"),
    }
