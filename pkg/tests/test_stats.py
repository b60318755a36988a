import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from ringdrive.stats import mcnemar, paired_t, student_t_sf


def t_sf_quadrature(t, df):
    """Independent oracle: integrate the Student-t density numerically.

    Uses the bounded interval [0, t] and symmetry, which keeps the
    quadrature error tiny even for the heavy df = 1 tail.
    """
    assert t >= 0
    def pdf(x):
        logc = gammaln((df + 1) / 2) - gammaln(df / 2) - 0.5 * math.log(df * math.pi)
        return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))

    val, err = quad(pdf, 0.0, t, limit=200)
    assert err < 1e-8
    return 0.5 - val


class TestPairedT:
    def test_zero_mean_difference(self):
        res = paired_t([1, -1, 1, -1], [0, 0, 0, 0])
        assert res.statistic == 0.0
        assert res.p_value == 1.0
        assert res.df == 3

    def test_frozen_example(self):
        res = paired_t([1, 2, 3, 4], [0, 0, 0, 0])
        assert res.statistic == pytest.approx(3.872983, abs=1e-5)
        assert res.df == 3
        assert res.p_value == pytest.approx(0.030466, abs=1e-5)

    def test_antisymmetry(self):
        rng = np.random.default_rng(0)
        x, y = rng.normal(size=10), rng.normal(size=10)
        a, b = paired_t(x, y), paired_t(y, x)
        assert a.statistic == pytest.approx(-b.statistic, abs=1e-12)
        assert a.p_value == pytest.approx(b.p_value, abs=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=8), rng.normal(size=8)
        a = paired_t(x, y)
        b = paired_t(x + 3.7, y + 3.7)
        assert a.statistic == pytest.approx(b.statistic, abs=1e-9)
        assert a.p_value == pytest.approx(b.p_value, abs=1e-9)

    def test_identical_constant_difference_is_degenerate(self):
        res = paired_t([2, 2, 2], [1, 1, 1])
        assert res.degenerate
        assert math.isinf(res.statistic) and res.statistic > 0
        assert res.p_value == 0.0

    def test_all_zero_difference(self):
        res = paired_t([1, 1, 1], [1, 1, 1])
        assert not res.degenerate
        assert res.statistic == 0.0 and res.p_value == 1.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            paired_t([1], [2])
        with pytest.raises(ValueError):
            paired_t([1, 2], [1, 2, 3])

    def test_p_matches_quadrature_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(2, 12))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            if np.std(x - y, ddof=1) == 0.0:
                continue
            res = paired_t(x, y)
            expected = 2.0 * t_sf_quadrature(abs(res.statistic), res.df)
            assert res.p_value == pytest.approx(expected, abs=1e-6)

    def test_sf_tails(self):
        assert student_t_sf(math.inf, 5) == 0.0
        assert student_t_sf(-math.inf, 5) == 1.0
        assert student_t_sf(0.0, 5) == pytest.approx(0.5, abs=1e-12)


class TestMcnemar:
    @pytest.mark.parametrize("b,c,chi2,p", [
        (9, 0, 7.111, 0.007661),
        (7, 0, 5.143, 0.02334),
        (2, 0, 0.5, 0.4795),
    ])
    def test_study_anchors(self, b, c, chi2, p):
        res = mcnemar(b, c)
        assert res.statistic == pytest.approx(chi2, abs=1e-3)
        assert res.p_value == pytest.approx(p, abs=1e-4)
        assert res.df == 1.0

    def test_symmetric_counts(self):
        res = mcnemar(4, 4)
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_exchange_symmetry_exact(self):
        for b in range(0, 12):
            for c in range(0, 12):
                if b + c == 0:
                    continue
                assert mcnemar(b, c) == mcnemar(c, b)

    def test_correction_clamps_at_zero(self):
        assert mcnemar(3, 3).statistic == 0.0
        assert mcnemar(4, 3).statistic == 0.0  # |b-c| = 1 -> corrected to 0

    def test_errors(self):
        with pytest.raises(ValueError):
            mcnemar(0, 0)
        with pytest.raises(ValueError):
            mcnemar(-1, 2)
