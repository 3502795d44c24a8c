import math

import pytest

from orliczfem.nfunctions import DeltaPower, PowerLaw, SumPower, Truncated

# Spec roster used by the inequality sweeps and the tensor-map tests.
SPEC_ROSTER = [
    PowerLaw(1.3),
    PowerLaw(1.5),
    PowerLaw(2.0),
    PowerLaw(3.0),
    PowerLaw(4.0),
    DeltaPower(3.0, 1.0),
    DeltaPower(1.5, 0.1),
    SumPower(1.5, 3.0),
    Truncated(PowerLaw(3.0), 0.1, 10.0),
    Truncated(PowerLaw(1.3), 1e-4, 1e4),
    Truncated(DeltaPower(1.5, 0.5), 0.01, 100.0),
    Truncated(PowerLaw(3.0), 1.0, math.inf),
]


def spec_id(spec):
    return spec.describe().replace(", ", ",").replace("variant=", "")


@pytest.fixture(params=SPEC_ROSTER, ids=spec_id)
def spec(request):
    return request.param
