import json
import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from oracle import Oracle  # noqa: E402

from mtbn.model import parse_model  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_doc(name):
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


def load_model(name):
    return parse_model((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fig21():
    return load_model("fig21.json")


@pytest.fixture(scope="session")
def fig3():
    return load_model("fig3.json")


@pytest.fixture(scope="session")
def glucose():
    return load_model("glucose.json")


@pytest.fixture(scope="session")
def glucose_t3():
    return load_model("glucose_t3.json")


@pytest.fixture(scope="session")
def glucose_t2_doc():
    doc = load_doc("glucose.json")
    doc["range"]["tn"] = 2
    return doc


@pytest.fixture(scope="session")
def glucose_t2(glucose_t2_doc):
    return parse_model(json.dumps(glucose_t2_doc))


@pytest.fixture(scope="session")
def glucose_t2_oracle(glucose_t2_doc):
    return Oracle(glucose_t2_doc)


@pytest.fixture(scope="session")
def mutual_exclusion():
    return load_model("mutual_exclusion.json")


@pytest.fixture(scope="session")
def reciprocal_bad():
    return load_model("reciprocal_bad.json")


@pytest.fixture(scope="session")
def bp_cataract():
    return load_model("bp_cataract.json")


@pytest.fixture(scope="session")
def bp_cataract_oracle():
    return Oracle(load_doc("bp_cataract.json"))


@pytest.fixture(scope="session")
def bp_c_assoc():
    return load_model("bp_c_assoc.json")
