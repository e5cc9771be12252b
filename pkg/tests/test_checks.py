import pytest

from vistaformer.checks import *


def test_gradient_suite():
    res = gradient_suite()
    assert [name for name, _ in res] == [name for name, _ in LAYERS]
    for name, report in res:
        assert report.passed, (name, report)


@pytest.mark.slow
def test_end_to_end():
    name, report = gradient_suite(micro=True)[-1]
    assert name == 'micro model'
    assert report.tol == END_TO_END_TOL
    assert report.passed, report
