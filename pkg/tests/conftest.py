import io
import textwrap

import pytest

from percussion_quartet.patterns import load_default_library, load_library


def load_library_text(text: str):
    return load_library(io.StringIO(textwrap.dedent(text)))


@pytest.fixture(scope="session")
def default_library():
    return load_default_library()


# Two patterns per category, all-pairs transitions: small enough to
# brute-force every selection context.
EIGHT_PATTERN_LIBRARY = """
note_values: {long: 1.0, short: 0.5, shortest: 0.25}
transitions:
  even/quick: [even/quick, even/slow, uneven/quick]
  even/slow: [even/slow, even/quick, uneven/slow]
  uneven/quick: [uneven/quick, uneven/slow, even/quick]
  uneven/slow: [uneven/slow, uneven/quick, even/slow]
patterns:
  - id: eq1
    events: [{note: short}, {note: short}, {note: short}, {note: short},
             {note: short}, {note: short}, {note: short}, {note: short}]
  - id: eq2
    events: [{note: shortest}, {note: shortest}, {note: shortest}, {note: shortest}]
  - id: es1
    events: [{note: long}, {note: long}, {note: long}, {note: long}]
  - id: es2
    events: [{note: long}, {note: long}]
  - id: uq1
    events: [{note: long}, {note: short}, {note: short}, {note: shortest},
             {note: long}, {note: shortest}, {note: short}]
  - id: uq2
    events: [{note: short}, {note: shortest}, {note: shortest}, {note: short},
             {note: short}, {note: short}, {note: short}, {note: long}]
  - id: us1
    events: [{note: long}, {note: long}, {note: short}, {note: long}, {note: short}]
  - id: us2
    events: [{note: long}, {note: long}, {note: long}, {note: short}, {note: short}]
"""


@pytest.fixture(scope="session")
def eight_library():
    return load_library_text(EIGHT_PATTERN_LIBRARY)


def pytest_runtest_logreport(report):
    """One pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\nACCEPTANCE {name}: {'PASS' if report.passed else 'FAIL'}")
