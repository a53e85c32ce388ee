import json
from pathlib import Path

from bgpverify import config

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "bgpverify" / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text()


def fixture_doc(name: str) -> dict:
    return json.loads(fixture_text(name))


def load_network(name: str):
    return config.parse_network(fixture_text(name))


def load_pair(net_name: str, spec_name: str):
    net = load_network(net_name)
    prop, inv, ghosts = config.parse_spec(fixture_text(spec_name), net)
    return net, prop, inv, ghosts
