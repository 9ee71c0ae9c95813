import pytest

import opchain


@pytest.fixture(scope="session")
def kitchen_text() -> str:
    return opchain.bundled_domain_path("kitchen").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def kitchen_file(kitchen_text):
    result = opchain.parse_domain(kitchen_text)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.file


@pytest.fixture(scope="session")
def kitchen_domain(kitchen_file):
    return kitchen_file.to_logic_domain()


@pytest.fixture(scope="session")
def kitchen_operators(kitchen_file, kitchen_domain):
    return kitchen_file.build_operators(kitchen_domain)


@pytest.fixture(scope="session")
def put_away_goal(kitchen_file, kitchen_domain):
    return kitchen_file.goal_condition("spam_put_away", kitchen_domain)
