"""Shared pytest fixtures: on-disk config trees for CLI and acceptance tests."""

import pytest

from dpledger.sampledata import survey_csv_bytes

SERVICE_YAML = """\
dataset:
  csv_path: survey.csv
  schema:
    - {name: total_personal_income, type: numeric, domain: [-10000, 1000000]}
    - {name: total_family_income, type: numeric, domain: [-20000, 2000000]}
    - {name: age, type: numeric, domain: [0, 150]}
    - {name: race, type: categorical}
    - {name: citizenship, type: categorical}
query_types:
  - {name: average_personal_income, kind: average, column: total_personal_income}
  - {name: average_family_income, kind: average, column: total_family_income}
  - {name: frequency_us_citizen, kind: frequency, predicate: "citizenship == 'citizen'"}
  - {name: frequency_white_race, kind: frequency, predicate: "race == 'white'"}
  - {name: frequency_age_over_60, kind: frequency, predicate: "age > 60"}
budget: {epsilon: 8.0, delta: 1.0e-4}
listen: {host: 127.0.0.1, port: 8099}
"""

EXPERIMENT_YAML = """\
service_config: service.yaml
num_queries: 150
seed: 20240101
epsilon_range: [0.1, 1.1]
delta_range: [1.0e-5, 1.0e-4]
budget: {epsilon: 8.0, delta: 1.0e-4}
"""

UNIT_SERVICE_YAML = """\
dataset:
  csv_path: unit.csv
  schema:
    - {name: v, type: numeric, domain: [0, 4]}
query_types:
  - {name: alpha, kind: average, column: v}
  - {name: beta, kind: average, column: v}
  - {name: gamma, kind: average, column: v}
budget: {epsilon: 30.0, delta: 1.0e-4}
"""


@pytest.fixture(scope="session")
def survey_config_dir(tmp_path_factory):
    """Config tree for the five-query-type survey experiment."""
    root = tmp_path_factory.mktemp("survey_configs")
    (root / "survey.csv").write_bytes(survey_csv_bytes(rows=5000, seed=7))
    (root / "service.yaml").write_text(SERVICE_YAML)
    (root / "experiment.yaml").write_text(EXPERIMENT_YAML)
    return root


@pytest.fixture()
def unit_config_dir(tmp_path):
    """Config tree matching helpers.make_unit_service (unit sensitivities)."""
    (tmp_path / "unit.csv").write_bytes(b"v\n0\n1\n0\n1\n")
    (tmp_path / "service.yaml").write_text(UNIT_SERVICE_YAML)
    return tmp_path
