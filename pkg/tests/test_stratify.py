import random

import pytest

from agestand.core import (
    AgeBand,
    CountsTable,
    Sex,
    StratumKey,
    UnknownYearError,
    adjusted_series,
    combine_tables,
    crude_series,
    mean_age_series,
    standard_from_year,
    uniform_standard,
)
from agestand.decompose import counterfactual_series, decompose_change
from agestand.stratify import (
    NoRegionError,
    PipelineConfig,
    PipelineError,
    collapse,
    parse_standard_token,
    run_pipeline,
    strata,
)
from agestand.synth import baby_boom_scenario, synth_table

import oracle
from conftest import ALL, random_table

F, M = StratumKey(Sex.FEMALE), StratumKey(Sex.MALE)
REGIONS = ("west", "south", "northeast", "midwest")


def regional_table(seed=3):
    rng = random.Random(seed)
    keys = [StratumKey(s, r) for r in REGIONS for s in (Sex.MALE, Sex.FEMALE)]
    return random_table(rng, strata=keys)


def test_strata_by_sex():
    t = synth_table(baby_boom_scenario(sex_split=0.5))
    assert strata(t, {"sex"}) == [F, M]
    assert strata(t, set()) == [ALL]


def test_strata_region_by_sex_order():
    keys = strata(regional_table(), {"sex", "region"})
    assert [k.label for k in keys] == [
        "midwest/female", "midwest/male", "northeast/female", "northeast/male",
        "south/female", "south/male", "west/female", "west/male"]


def test_strata_no_region():
    t = synth_table(baby_boom_scenario(sex_split=0.5))
    with pytest.raises(NoRegionError):
        strata(t, {"region"})
    with pytest.raises(ValueError):
        strata(t, {"race"})


def test_collapse_sums_parts():
    t = regional_table()
    by_sex = collapse(t, {"sex"})
    assert by_sex.strata == [F, M]
    y, a = t.years[0], t.band.lo
    deaths = sum(t.cells[(y, a, StratumKey(Sex.FEMALE, r))][0] for r in REGIONS)
    assert by_sex.cells[(y, a, F)][0] == deaths


def test_collapse_prefers_existing_total():
    parts = synth_table(baby_boom_scenario(sex_split=0.5))
    total = synth_table(baby_boom_scenario(pulse=2.0))
    t = combine_tables(parts, total)
    assert collapse(t, set()).cells == total.cells
    assert strata(t, {"sex"}) == [F, M, ALL]


def test_single_stratum_matches_direct_calls():
    t = synth_table(baby_boom_scenario(drift=0.00002))
    res = run_pipeline(t, PipelineConfig(intervals=[(1999, 2013)]))[ALL]
    assert res.crude == crude_series(t)
    assert res.mean_age == mean_age_series(t)
    assert res.adjusted["uniform"] == adjusted_series(t, std=uniform_standard(t.band))
    assert res.counterfactual == counterfactual_series(t)
    assert res.decompositions == [decompose_change(t, t0=1999, t1=2013)]
    assert len(res.bias) == 1


def test_identical_strata_identical_outputs():
    a = synth_table(baby_boom_scenario(region="south"))
    b = synth_table(baby_boom_scenario(region="west"))
    res = run_pipeline(combine_tables(a, b), PipelineConfig(group_by={"region"}))
    south, west = res.values()
    assert south.crude.points == west.crude.points
    assert south.adjusted["uniform"].points == west.adjusted["uniform"].points


def test_baby_boom_three_standards_anchor():
    t = synth_table(baby_boom_scenario(drift=0.00002))
    cfg = PipelineConfig(standards=("uniform", "year:first", "last"))
    res = run_pipeline(t, cfg)[ALL]
    assert list(res.adjusted) == ["uniform", "year:1999", "year:2013"]
    for y in (1999, 2013):
        s = res.adjusted[f"year:{y}"]
        assert abs(s[y] - res.crude[y]) <= 1e-12
        for year in t.years:
            assert s[year] == pytest.approx(float(oracle.year_standardized(t, year, y, ALL)), abs=1e-12)
    for year in t.years:
        assert res.adjusted["uniform"][year] == pytest.approx(float(oracle.uniform(t, year, ALL)), abs=1e-12)


def test_anchor_lifted_through_strata():
    t = regional_table()
    y = t.years[-1]
    res = run_pipeline(t, PipelineConfig(standards=[f"year:{y}"], group_by={"sex", "region"}))
    for r in res.values():
        assert abs(r.adjusted[f"year:{y}"][y] - r.crude[y]) <= 1e-12


def test_stratum_independence():
    t = regional_table()
    cfg = PipelineConfig(standards=["uniform", "first"], group_by={"sex", "region"},
                         intervals=[("first", "last")] if len(t.years) > 1 else ())
    target = StratumKey(Sex.FEMALE, "south")
    before = run_pipeline(t, cfg)[target]
    cells = dict(t.cells)
    for k, (d, p) in cells.items():
        if k[2] != target:
            cells[k] = (d // 2, p + 17)
    after = run_pipeline(CountsTable.from_cells(cells), cfg)[target]
    assert repr(before) == repr(after)


def test_determinism_and_parallel():
    t = regional_table(11)
    cfg = PipelineConfig(standards=["uniform", "first", "last"], group_by={"sex", "region"})
    seq = run_pipeline(t, cfg)
    par = run_pipeline(t, cfg, workers=4)
    assert list(seq) == list(par)
    assert repr(seq) == repr(par) == repr(run_pipeline(t, cfg))


def test_pooled_sex_standard():
    t = synth_table(baby_boom_scenario(sex_split=0.3, drift=0.00001))
    own = run_pipeline(t, PipelineConfig(standards=["first"], group_by={"sex"}))
    pooled = run_pipeline(t, PipelineConfig(standards=["first"], group_by={"sex"},
                                            sex_standard="pooled"))
    assert list(pooled[F].adjusted) == ["year:1999/pooled"]
    both = collapse(t, set())
    std = standard_from_year(both, 1999)
    expected = adjusted_series(t, stratum=F, std=std)
    assert pooled[F].adjusted["year:1999/pooled"].points == expected.points
    # cohorts split identically by sex, so the two standards are proportional
    for y in t.years:
        assert own[F].adjusted["year:1999"][y] == pytest.approx(expected[y], abs=1e-15)


def test_config_validation():
    t = synth_table(baby_boom_scenario())
    with pytest.raises(ValueError, match="invalid standard"):
        PipelineConfig(standards=["median"])
    with pytest.raises(ValueError):
        PipelineConfig(standards=[])
    with pytest.raises(UnknownYearError):
        run_pipeline(t, PipelineConfig(standards=["year:1980"]))
    with pytest.raises(ValueError, match="forwards"):
        run_pipeline(t, PipelineConfig(intervals=[(2005, 2000)]))
    with pytest.raises(ValueError, match="exceeds"):
        run_pipeline(t, PipelineConfig(band=AgeBand(40, 54)))


def test_standard_tokens():
    assert parse_standard_token("Uniform") == "uniform"
    assert parse_standard_token("first") == "year:first"
    assert parse_standard_token("year:1999") == "year:1999"
    assert parse_standard_token("2013") == "year:2013"


def test_errors_annotated_with_stratum():
    t = synth_table(baby_boom_scenario(sex_split=0.5, region="south"))
    # zero-death baseline in one stratum makes its bias report undefined
    cells = dict(t.cells)
    for a in t.band.ages:
        k = (1999, a, StratumKey(Sex.MALE, "south"))
        cells[k] = (0, cells[k][1])
    bad = CountsTable.from_cells(cells)
    with pytest.raises(PipelineError) as info:
        run_pipeline(bad, PipelineConfig(group_by={"sex", "region"}, intervals=[(1999, 2013)]))
    assert info.value.stratum == StratumKey(Sex.MALE, "south")
    assert "south/male" in str(info.value)
