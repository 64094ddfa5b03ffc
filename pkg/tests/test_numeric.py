from fractions import Fraction

import mpmath
import pytest

from gtcnet.numeric import DEFAULT_PRECISION_BITS, MIN_PRECISION_BITS, LogValue, log_exact, workprec


def test_workprec_default_outside_app():
    with workprec():
        assert mpmath.mp.prec == DEFAULT_PRECISION_BITS
    with workprec(16):
        assert mpmath.mp.prec == MIN_PRECISION_BITS
    with workprec(300):
        assert mpmath.mp.prec == 300


def test_workprec_reads_app_config(app):
    app.config["HIGH_PRECISION_BITS"] = 200
    with app.app_context():
        with workprec():
            assert mpmath.mp.prec == 200
        with workprec(128):
            assert mpmath.mp.prec == 128


def test_log_value():
    small = LogValue(mpmath.log(mpmath.mpf(1611)))
    assert small.value == pytest.approx(1611)
    assert LogValue(mpmath.mpf(800)).value is None
    with pytest.raises(TypeError):
        float(small)


def test_log_exact():
    assert float(log_exact(Fraction(1611, 1))) == pytest.approx(float(mpmath.log(1611)))
    assert float(log_exact(Fraction(1, 4))) == pytest.approx(-float(mpmath.log(4)))
    with pytest.raises(ValueError):
        log_exact(0)
