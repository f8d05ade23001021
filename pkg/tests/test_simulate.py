import math

import pytest

from stroopsaber.beatmap import default_song_catalog, generate_beatmap
from stroopsaber.core import GameMode, Level, ReactionProfile
from stroopsaber.scoring import Outcome, accumulate
from stroopsaber.simulate import (
    COR_RATE_WINDOW,
    GREAT_RATE_WINDOW,
    CalibrationReport,
    PlayerModel,
    calibration_report,
    default_population,
    difficulty_ordering_check,
    expected_rates,
    hit_probability,
    simulate_song,
)

CATALOG = default_song_catalog()
EASY_MAP = generate_beatmap(CATALOG[1], Level.EASY, GameMode.COLOR, 5)
HARD_MAP = generate_beatmap(CATALOG[9], Level.HARD, GameMode.WORD, 5)


def perfect_model(seed=1):
    return PlayerModel(
        seed=seed,
        rt_mean_ms=300.0,
        rt_sigma=0.05,
        base_accuracy=1.0,
        incongruency_penalty={},
        speed_ability=1.0,
        zone_ability=1.0,
    )


class TestSimulateSong:
    def test_perfect_player_never_faults_or_misses(self):
        play = simulate_song(perfect_model(), EASY_MAP)
        assert play.counts.fault == 0 and play.counts.miss == 0
        assert play.counts.cor == play.counts.total == len(EASY_MAP.blocks)
        assert play.counts.great == play.counts.total  # both bonuses always earned
        assert play.gs == 5.0

    def test_hopeless_player_never_scores_cor(self):
        model = PlayerModel(seed=2, base_accuracy=0.0, incongruency_penalty={})
        play = simulate_song(model, EASY_MAP)
        assert play.counts.cor == 0 and play.counts.great == 0

    def test_deterministic_in_model_and_map_seeds(self):
        model = PlayerModel(seed=9)
        a = simulate_song(model, HARD_MAP)
        b = simulate_song(model, HARD_MAP)
        assert a == b
        c = simulate_song(PlayerModel(seed=10), HARD_MAP)
        assert c != a

    def test_counts_satisfy_scoring_invariants(self):
        for seed in range(12):
            play = simulate_song(PlayerModel(seed=seed), HARD_MAP)
            counts = play.counts
            assert counts.violations() == []
            assert counts == accumulate(play.results)
            assert -1.0 <= play.gs <= 5.0

    def test_hits_reference_their_blocks(self):
        play = simulate_song(PlayerModel(seed=3), EASY_MAP)
        for block, hit in zip(EASY_MAP.blocks, play.hits):
            if hit is not None:
                assert hit.block_index == block.index
                assert block.spawn_time_s <= hit.hit_time_s <= block.spawn_time_s + block.flight_time_s + 0.2

    def test_empirical_cor_rate_matches_closed_form(self):
        # Average many replications (distinct player seeds, same behavior model)
        # against the analytic expectation.
        replications = 10_000
        total_cor = 0
        total_blocks = 0
        for seed in range(replications):
            play = simulate_song(PlayerModel(seed=seed), EASY_MAP)
            total_cor += play.counts.cor
            total_blocks += play.counts.total
        empirical = total_cor / total_blocks

        # Independent recomputation of the expectation via the erf-based CDF.
        model = PlayerModel(seed=0)
        params_cap_ms = 2500.0
        mu = math.log(model.rt_mean_ms) - model.rt_sigma**2 / 2
        p_hit = 0.5 * (1 + math.erf((math.log(params_cap_ms) - mu) / (model.rt_sigma * math.sqrt(2))))
        expected = 0.0
        for block in EASY_MAP.blocks:
            penalty = 0.10 if not block.stimulus.congruent else 0.0
            expected += p_hit * (0.90 - penalty)
        expected /= len(EASY_MAP.blocks)
        assert empirical == pytest.approx(expected, abs=0.01)
        assert expected_rates(model, EASY_MAP)["cor"] == pytest.approx(expected, abs=1e-12)


class TestHitProbability:
    def test_below_floor_is_zero(self):
        assert hit_probability(PlayerModel(seed=1), 100.0) == 0.0

    def test_monotone_in_ceiling(self):
        model = PlayerModel(seed=1)
        values = [hit_probability(model, ms) for ms in (400, 700, 1000, 1500, 2500)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_profile_fit_centers_mean(self):
        model = PlayerModel.from_reaction_profile(ReactionProfile(), seed=4)
        # Lognormal mean = exp(mu + sigma^2/2) must equal the profile mean.
        assert math.exp(model.rt_mu + model.rt_sigma**2 / 2) == pytest.approx(756.0)


class TestCalibration:
    def test_default_population_inside_windows(self):
        report = calibration_report(default_population())
        assert isinstance(report, CalibrationReport)
        assert len(report.levels) == 3
        for lc in report.levels:
            assert COR_RATE_WINDOW[0] <= lc.cor_rate <= COR_RATE_WINDOW[1]
            assert GREAT_RATE_WINDOW[0] <= lc.great_rate <= GREAT_RATE_WINDOW[1]
        assert report.all_inside

    def test_perfect_players_flagged_outside(self):
        population = [perfect_model(seed) for seed in range(4)]
        report = calibration_report(population)
        for lc in report.levels:
            assert lc.cor_rate > COR_RATE_WINDOW[1]
            assert not lc.cor_in_window

    def test_deterministic(self):
        population = default_population()
        a = calibration_report(population, seed=3)
        b = calibration_report(population, seed=3)
        assert a == b

    def test_empty_population_rejected(self):
        with pytest.raises(ValueError):
            calibration_report([])


class TestOrdering:
    def test_default_population_easy_on_top(self):
        check = difficulty_ordering_check(default_population())
        assert check.easy_above_normal and check.easy_above_hard
        assert check.mean_gs[Level.EASY] > check.mean_gs[Level.NORMAL]
        assert check.mean_gs[Level.EASY] > check.mean_gs[Level.HARD]

    def test_identical_params_no_flag(self):
        # Same songs played at the same level under three labels: differences
        # are pure noise, so no ordering flag may fire.
        population = default_population(size=6)
        maps = {level: generate_beatmap(CATALOG[2], Level.NORMAL, GameMode.COLOR, 31) for level in Level}
        means = {}
        for level, beatmap in maps.items():
            plays = [simulate_song(m, beatmap) for m in population]
            means[level] = sum(p.gs for p in plays) / len(plays)
        margin = 0.05
        assert abs(means[Level.EASY] - means[Level.NORMAL]) <= margin
        assert abs(means[Level.EASY] - means[Level.HARD]) <= margin

    def test_higher_penalty_widens_gap(self):
        gaps = []
        for penalty in (0.05, 0.20, 0.35):
            population = [
                PlayerModel(seed=s, incongruency_penalty={lv: penalty for lv in Level})
                for s in range(8)
            ]
            check = difficulty_ordering_check(population, seed=5, margin=0.0)
            gaps.append(check.mean_gs[Level.EASY] - check.mean_gs[Level.HARD])
        assert gaps[0] < gaps[1] < gaps[2]

    def test_cor_rate_nonincreasing_in_penalty(self):
        rates = []
        for penalty in (0.0, 0.1, 0.2, 0.3, 0.4):
            model = PlayerModel(seed=6, incongruency_penalty={lv: penalty for lv in Level})
            plays = [simulate_song(model, HARD_MAP)]
            counts = plays[0].counts
            rates.append(counts.cor / counts.total)
        assert all(b <= a + 1e-9 for a, b in zip(rates, rates[1:]))


def test_model_probability_validation():
    with pytest.raises(ValueError):
        PlayerModel(seed=1, base_accuracy=1.4)
    with pytest.raises(ValueError):
        PlayerModel(seed=1, speed_ability=-0.1)
    with pytest.raises(ValueError):
        PlayerModel(seed=1, incongruency_penalty={Level.EASY: 2.0})
