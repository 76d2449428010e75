import pytest

from defent import parse_set

KR_TEXT = """
# two points, the line through them, and a nondegenerate parabola through both
set KR(a1, a2, b1, b2, c0, c1, d0, d1, d2)
  blocks A=(a1,a2); B=(b1,b2); C=(c0,c1); D=(d0,d1,d2)
  := a2 = c1*a1 + c0 /\\ a2 = d2*a1^2 + d1*a1 + d0
  /\\ b2 = c1*b1 + c0 /\\ b2 = d2*b1^2 + d1*b1 + d0
  /\\ a1 != b1 /\\ d2 != 0
"""

HYP_TEXT = "set Hyp(x, y) := x*y = 0"
SQRT_TEXT = "set Sq(y) := exists x. x^2 + y^2 = 0"
CUBIC_TEXT = "set Cub(a, b, c, x) := x^3 + a*x^2 + b*x + c = 0"
CUBIC_PROJ_TEXT = "set CubP(a, b, c) := exists x. x^3 + a*x^2 + b*x + c = 0"


@pytest.fixture(scope="session")
def kr_set():
    return parse_set(KR_TEXT)


@pytest.fixture(scope="session")
def hyp_set():
    return parse_set(HYP_TEXT)


@pytest.fixture(scope="session")
def sqrt_set():
    return parse_set(SQRT_TEXT)


@pytest.fixture(scope="session")
def cubic_set():
    return parse_set(CUBIC_TEXT)


@pytest.fixture(scope="session")
def cubic_proj_set():
    return parse_set(CUBIC_PROJ_TEXT)
