# -*- coding: utf-8 -*-
import math
import pytest
from unittest.mock import patch
from pellmoments.arith import is_discriminant
from pellmoments.forms import (
    LApprox,
    QuadForm,
    _smoothing_weights,
    assign_class_numbers,
    class_number_cycles,
    class_number_formula,
    class_number_hybrid,
    h_log_eps_sum,
    l_smoothed,
    l_value,
    reduced_forms,
    rho_cycles,
    rho_step,
    smoothing_terms,
)
from pellmoments.pell import DiscriminantRecord
from pellmoments.util import (
    ContractError,
    DomainError,
    UnreliableClassNumberError,
    ValidationError,
)

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"

Q = QuadForm
L5 = 2 * math.log((1 + math.sqrt(5)) / 2) / math.sqrt(5)
L8 = math.log(1 + math.sqrt(2)) / math.sqrt(2)
REC5 = DiscriminantRecord(5, 3, 1, math.log((3 + math.sqrt(5)) / 2))
REC12 = DiscriminantRecord(12, 4, 1, math.log(2 + math.sqrt(3)))

# narrow class numbers, i.e. cycles of reduced forms
KNOWN_H = {5: 1, 8: 1, 12: 2, 13: 1, 17: 1, 21: 2, 24: 2, 28: 2, 29: 1, 32: 2, 229: 3}


def _brute_reduced(d):
    found = set()
    for b in range(1, math.isqrt(d) + 1):
        for a in range(-d, d + 1):
            if a == 0 or (b * b - d) % (4 * a):
                continue
            form = Q(a, b, (b * b - d) // (4 * a))
            if form.is_reduced(d) and form.primitive:
                found.add(form)
    return found


def test_quadform_properties():
    form = Q(1, 2, -2)
    assert form.discriminant == 12
    assert form.primitive
    assert not Q(2, 4, -2).primitive
    assert str(form) == "(1,2,-2)"


def test_is_reduced():
    assert Q(1, 2, -2).is_reduced(12)
    assert Q(1, 1, -1).is_reduced(5)
    assert Q(2, 1, -2).is_reduced(17)
    assert not Q(1, 1, -3).is_reduced(13)
    assert not Q(1, 2, -2).is_reduced(13)
    assert not Q(7, 2, -1).is_reduced(32)


def test_reduced_forms_examples():
    assert set(reduced_forms(12)) == {Q(1, 2, -2), Q(-1, 2, 2), Q(2, 2, -1), Q(-2, 2, 1)}
    assert set(reduced_forms(5)) == {Q(1, 1, -1), Q(-1, 1, 1)}
    assert set(reduced_forms(32)) == {Q(1, 4, -4), Q(-1, 4, 4), Q(4, 4, -1), Q(-4, 4, 1)}


def test_reduced_forms_sorted_and_complete(spf_small):
    for d in range(5, 300):
        if not is_discriminant(d):
            continue
        forms = reduced_forms(d, spf_small)
        assert forms == sorted(forms, key=lambda f: (f.b, f.a))
        assert set(forms) == _brute_reduced(d), d
        assert len(forms) == len(set(forms))


def test_reduced_forms_domain():
    for bad in (4, 7, 0, -3):
        with pytest.raises(DomainError):
            reduced_forms(bad)


def test_rho_step_examples():
    assert rho_step(Q(1, 2, -2), 12) == Q(-2, 2, 1)
    assert rho_step(Q(-2, 2, 1), 12) == Q(1, 2, -2)
    assert rho_step(Q(1, 1, -1), 5) == Q(-1, 1, 1)
    assert rho_step(Q(1, 4, -4), 32) == Q(-4, 4, 1)


def test_rho_step_needs_reduced_form():
    with pytest.raises(ContractError):
        rho_step(Q(1, 1, -3), 13)
    with pytest.raises(ContractError):
        rho_step(Q(1, 2, -2), 13)


def test_rho_step_stays_reduced():
    for d in range(5, 400):
        if not is_discriminant(d):
            continue
        for form in reduced_forms(d):
            image = rho_step(form, d)
            assert image.is_reduced(d)
            assert image.a == form.c
            assert image.discriminant == d


def test_rho_cycles_partition():
    for d in (5, 12, 60, 229, 316, 401):
        forms = reduced_forms(d)
        cycles = rho_cycles(d)
        assert sorted(f for cycle in cycles for f in cycle) == sorted(forms)
        for cycle in cycles:
            assert len(cycle) % 2 == 0
            for current, following in zip(cycle, cycle[1:] + cycle[:1]):
                assert rho_step(current, d) == following


def test_class_number_cycles_known():
    for d, h in KNOWN_H.items():
        assert class_number_cycles(d) == h, d


def test_smoothing_terms():
    assert smoothing_terms(10**4) == math.ceil(10**4 * math.log(10**16))


def test_smoothing_weights_are_read_only():
    weights = _smoothing_weights(1.0, 100.0)
    assert not weights.flags.writeable
    assert weights[0] == 0.0
    assert weights[1] == pytest.approx(math.exp(-1 / 100))


def test_l_smoothed():
    approx = l_smoothed(5, 1, 10**4)
    assert isinstance(approx, LApprox)
    assert approx.value == pytest.approx(L5, abs=0.01)
    assert approx.terms_used == smoothing_terms(10**4)
    assert l_smoothed(8, 1, 10**4).value == pytest.approx(L8, abs=0.01)


def test_l_smoothed_arguments():
    with pytest.raises(ValidationError):
        l_smoothed(5, 0, 100)
    with pytest.raises(ValidationError):
        l_smoothed(5, 1, 1)
    with pytest.raises(DomainError):
        l_smoothed(9, 1, 100)


def test_l_smoothed_powers_agree():
    for d in (5, 8, 12, 13):
        base = l_smoothed(d, 1, 10**4).value
        for k in (2, 3):
            assert l_smoothed(d, k, 10**4).value == pytest.approx(base**k, rel=1e-2), (d, k)


def test_l_smoothed_power_gap_raises():
    # at y = 10^4 the cubed series for d = 9992 is several percent off the cube of L
    with pytest.raises(ValidationError):
        l_smoothed(9992, 3, 10**4)


def test_l_value():
    assert l_value(5) == pytest.approx(L5, rel=1e-10)
    assert l_value(8) == pytest.approx(L8, rel=1e-10)
    # d = 20 = 5 * 2^2, chi_5(2) = -1
    assert l_value(20) == pytest.approx(L5 * 1.5, rel=1e-10)
    # d = 45 = 5 * 3^2, chi_5(3) = -1
    assert l_value(45) == pytest.approx(L5 * (1 + 1 / 3), rel=1e-10)
    with pytest.raises(DomainError):
        l_value(16)


def test_class_number_formula():
    estimate = class_number_formula(REC5, 0.43041)
    assert estimate.h_real == pytest.approx(1.0, abs=1e-4)
    assert estimate.h_rounded == 1
    assert not estimate.unreliable
    estimate = class_number_formula(REC5, 0.6)
    assert estimate.h_real == pytest.approx(1.394, abs=1e-3)
    assert estimate.unreliable
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(DomainError):
            class_number_formula(REC5, bad)


def test_formula_agrees_with_cycles(run200):
    for rec in run200.records:
        estimate = class_number_formula(rec, l_value(rec.d))
        assert abs(estimate.h_real - class_number_cycles(rec.d)) < 1e-6, rec.d


def test_class_number_hybrid_modes():
    exact = class_number_hybrid(REC12, mode="exact")
    assert (exact.h, exact.h_mode, exact.flagged) == (2, "exact", False)
    formula = class_number_hybrid(REC12, mode="formula")
    assert (formula.h, formula.h_mode, formula.flagged) == (2, "formula", False)
    smoothed = class_number_hybrid(REC12, mode="formula", l_method="smoothed")
    assert smoothed.h == 2
    assert class_number_hybrid(REC12, mode="auto", d_exact_max=100).h_mode == "exact"
    assert class_number_hybrid(REC12, mode="auto", d_exact_max=10).h_mode == "formula"
    assert REC12.h is None
    with pytest.raises(ValidationError):
        class_number_hybrid(REC12, mode="guess")
    with pytest.raises(ValidationError):
        class_number_hybrid(REC12, mode="formula", l_method="series")


def test_class_number_hybrid_unreliable():
    fake = LApprox(5, 1, 100, 0.6, 10)
    with patch("pellmoments.forms.l_smoothed", return_value=fake) as mocked:
        flagged = class_number_hybrid(REC5, mode="formula", l_method="smoothed", y=100)
        assert mocked.call_count == 2
        assert mocked.call_args[0] == (5, 1, 1000)
    assert flagged.flagged
    assert flagged.h == 1
    with patch("pellmoments.forms.l_smoothed", return_value=fake):
        with pytest.raises(UnreliableClassNumberError):
            class_number_hybrid(REC5, mode="formula", l_method="smoothed", y=100, strict=True)


def test_class_number_hybrid_never_below_one():
    with patch("pellmoments.forms.l_value", return_value=0.1):
        rec = class_number_hybrid(REC5, mode="formula")
    assert rec.h == 1
    assert rec.h_mode == "formula"
    assert rec.flagged
    assert class_number_formula(REC5, 0.1).unreliable


def test_class_number_hybrid_checks_smoothed_rounding():
    # an L value that rounds confidently to h = 3 where h(12) = 2
    wrong = LApprox(12, 1, 10**4, 3 * REC12.log_eps / math.sqrt(12), 10)
    with patch("pellmoments.forms.l_smoothed", return_value=wrong):
        rec = class_number_hybrid(REC12, mode="formula", l_method="smoothed")
        assert (rec.h, rec.flagged) == (2, True)
        with pytest.raises(UnreliableClassNumberError):
            class_number_hybrid(REC12, mode="formula", l_method="smoothed", strict=True)


def test_smoothed_formula_large_d(run2000_exact):
    records = list(run2000_exact.records)[-8:]
    for rec in records:
        smoothed = class_number_hybrid(rec, mode="formula", l_method="smoothed")
        assert smoothed.h == rec.h, rec.d
    assert records[-1].d == 3999996


def test_assign_class_numbers(run200):
    exact = assign_class_numbers(run200, mode="exact")
    assert exact.has_class_numbers
    assert exact.h_mode_mix()["exact"] == len(run200)
    assert not run200.has_class_numbers
    mixed = assign_class_numbers(run200, mode="auto", d_exact_max=1000)
    mix = mixed.h_mode_mix()
    assert mix["exact"] == sum(1 for d in run200.d_values if d <= 1000)
    assert mix["exact"] + mix["formula"] == len(run200)
    assert mixed.frame["h"].tolist() == exact.frame["h"].tolist()
    assert not mixed.frame["flagged"].any()
    for d, h in KNOWN_H.items():
        if d in exact.d_values:
            assert exact.record(d).h == h


def test_assign_class_numbers_threads(run200):
    single = assign_class_numbers(run200, mode="auto", d_exact_max=500)
    threaded = assign_class_numbers(run200, mode="auto", d_exact_max=500, threads=2)
    assert threaded.frame["h"].tolist() == single.frame["h"].tolist()
    assert threaded.frame["h_mode"].tolist() == single.frame["h_mode"].tolist()


def test_h_log_eps_sum(run10):
    with pytest.raises(ValidationError):
        h_log_eps_sum(run10)
    completed = assign_class_numbers(run10, mode="exact")
    expected = math.fsum(r.h * r.log_eps for r in completed.records)
    assert h_log_eps_sum(completed) == expected
