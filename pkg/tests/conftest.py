import math

import pytest

from pmc_rotor.curvfn import Constant, GrimReaper, Polynomial

SAMPLE_PROFILES = {
    "const1": Constant(1.0),
    "const_neg": Constant(-0.7),
    "y_minus_half": Polynomial((-0.5, 1.0)),
    "one_plus_y2": Polynomial((1.0, 0.0, 1.0)),
    "y_plus_2": Polynomial((2.0, 1.0)),
    "y2_minus_1": Polynomial((-1.0, 0.0, 1.0)),
    "wing": Polynomial((0.0, 2.0, 1.0)),
    "annulus": Polynomial((0.0, 0.0, 2.0, 1.0)),
    "grim": GrimReaper(),
}


@pytest.fixture(params=sorted(SAMPLE_PROFILES))
def any_profile(request):
    return SAMPLE_PROFILES[request.param]


HALF_PI = math.pi / 2
