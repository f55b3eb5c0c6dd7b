import pytest

from agestand.diagnostics import export_checks, min_pairwise_agreement, sign_agreement, step_signs
from agestand.synth import baby_boom_scenario, synth_table


def test_step_signs():
    assert step_signs({1: 0.1, 2: 0.2, 3: 0.2, 4: 0.1}) == [1, 0, -1]


def test_sign_agreement():
    a = {1: 0.1, 2: 0.2, 3: 0.3}
    b = {1: 0.1, 2: 0.3, 3: 0.2}
    assert sign_agreement(a, a) == 1.0
    assert sign_agreement(a, b) == 0.5
    assert min_pairwise_agreement([a, a, b]) == 0.5
    with pytest.raises(ValueError):
        sign_agreement(a, {1: 0.1})


def test_export_checks_on_synthetic_sexes():
    women = synth_table(baby_boom_scenario(drift=0.00002, sex_split=0.5))
    checks = export_checks(women)
    assert [c.name for c in checks] == ["adjusted rises then flat", "composition share about half",
                                        "trend bias about 5 points", "women up, men reversed"]
    # steady drift never flattens and men rise too
    assert not checks[0].passed and not checks[3].passed


def test_export_checks_without_sex_rows():
    checks = export_checks(synth_table(baby_boom_scenario()))
    assert checks[-1].passed is False and "no female/male" in checks[-1].detail
