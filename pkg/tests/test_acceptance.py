"""Acceptance gate: every documented criterion at its stated tolerance.

Each test prints its PASS/FAIL line so a verbose run reads as the criterion
report. The angle-table criterion is known to fail on four rows whose
reference values are not measurable suprema (three are conservative
literature bounds, one derives from an asymptote formula evaluated outside
the stability region); the check's detail string carries the measured
values, which are confirmed by independent root-condition and recurrence
oracles. See README.md, "Angle table caveat".
"""

import pytest

from imexssp.verify import CRITERIA, tol_scale


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name):
    result = CRITERIA[name](tol_scale())
    print(result.line)
    assert result.passed, result.line
