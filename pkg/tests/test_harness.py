import numpy as np
import pytest

from potlab.dynamics import OMDConfig
from potlab.econ import EconKind
from potlab.games import GameShape
from potlab.harness import (
    BinStatistics,
    ExperimentConfig,
    bin_index,
    run_alpha_sweep,
    run_convergence_experiment,
    run_distribution_experiment,
    run_econ_sweep,
    run_runtime_benchmark,
    run_spne_experiment,
    run_standard_games,
    write_csv,
)
from potlab.opcache import OperatorCache


@pytest.fixture(scope="module")
def cache():
    return OperatorCache(None)


def small_cfg(**overrides) -> ExperimentConfig:
    base = dict(
        settings=[GameShape.of((2, 2))],
        samples_per_setting=60,
        master_seed=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestBinning:
    def test_zero_goes_to_first_bin(self):
        assert bin_index(0.0) == 1

    def test_bin_edges_are_half_open(self):
        assert bin_index(0.05) == 1
        assert bin_index(0.0501) == 2
        assert bin_index(1.0) == 20

    def test_every_value_lands_in_exactly_one_bin(self):
        rng = np.random.default_rng(0)
        for p in rng.random(1000):
            k = bin_index(p)
            assert 1 <= k <= 20
            assert (k - 1) / 20 < p <= k / 20 or (p == 0 and k == 1)


class TestCsv:
    def test_layout(self, tmp_path):
        path = write_csv(
            tmp_path / "x.csv",
            ["a", "b", "c"],
            [(1, None, 0.1), (2, True, 1.0 / 3.0)],
            {"potlab": "0.1.0", "seed": 5},
        )
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# potlab=0.1.0 seed=5")
        assert lines[1] == "a,b,c"
        assert lines[2] == "1,,0.10000000000000001"
        assert lines[3] == "2,true,0.33333333333333331"

    def test_float_roundtrip_17_digits(self, tmp_path):
        value = 0.6321205588285577
        path = write_csv(tmp_path / "y.csv", ["v"], [(value,)], {})
        assert float(path.read_text().splitlines()[2]) == value


class TestDistribution:
    def test_deterministic_byte_identical(self, tmp_path, cache):
        cfg = small_cfg()
        run_distribution_experiment(cfg, cache, tmp_path / "a")
        run_distribution_experiment(cfg, cache, tmp_path / "b")
        for name in ("dist_games.csv", "dist_summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summary_fields(self, cache):
        records, summary = run_distribution_experiment(small_cfg(), cache)
        assert len(records) == 60
        (label, n, mean, var, lo, hi, pure_frac, spne_frac) = summary[0]
        assert label == "2x2" and n == 60
        assert 0 <= lo <= mean <= hi <= 1
        assert 0 <= spne_frac <= pure_frac <= 1

    def test_seed_changes_output(self, cache):
        a = run_distribution_experiment(small_cfg(), cache)[0]
        b = run_distribution_experiment(small_cfg(master_seed=6), cache)[0]
        assert [r.seed for r in a] != [r.seed for r in b]


class TestSpneBins:
    def test_every_bin_emitted(self, cache):
        stats = run_spne_experiment(small_cfg(), cache)
        assert len(stats) == 20
        assert [s.bin for s in stats] == list(range(1, 21))

    def test_empty_bins_have_null_fraction(self, cache):
        stats = run_spne_experiment(small_cfg(), cache)
        for s in stats:
            if s.n_games == 0:
                assert s.spne_fraction is None
            else:
                assert 0.0 <= s.spne_fraction <= 1.0

    def test_empty_bin_serializes_as_empty_field(self, tmp_path, cache):
        run_spne_experiment(small_cfg(), cache, tmp_path)
        rows = (tmp_path / "spne_bins.csv").read_text().splitlines()[2:]
        empties = [r for r in rows if r.split(",")[4] == "0"]
        assert empties and all(r.endswith(",") for r in empties)


class TestConvergence:
    def test_bins_and_counts(self, cache):
        stats = run_convergence_experiment(small_cfg(), cache)
        assert len(stats) == 20
        populated = [s for s in stats if s.n_games]
        assert populated
        for s in populated:
            assert s.n_runs == s.n_games  # one uniform init per game
            assert 0.0 <= s.convergence_fraction <= 1.0

    def test_random_inits_report_stddev(self, cache):
        stats = run_convergence_experiment(
            small_cfg(samples_per_setting=25, num_random_inits=3), cache
        )
        populated = [s for s in stats if s.n_games]
        assert any(s.n_runs == 3 * s.n_games for s in populated)

    def test_parallel_schedule_matches_serial(self, cache):
        cfg_serial = small_cfg(samples_per_setting=30)
        cfg_par = small_cfg(samples_per_setting=30, jobs=2)
        a = run_convergence_experiment(cfg_serial, cache)
        b = run_convergence_experiment(cfg_par, cache)
        assert [(s.bin, s.n_games, s.convergence_fraction) for s in a] == [
            (s.bin, s.n_games, s.convergence_fraction) for s in b
        ]


class TestAlphaSweep:
    def test_endpoints_and_original_marker(self, cache):
        rows = run_alpha_sweep([EconKind.FPSB], [0.0, 0.5, 1.0], 2, cache, actions=8)
        assert len(rows) == 3
        by_alpha = {r[1]: r for r in rows}
        assert by_alpha[0.0][2] == pytest.approx(0.0, abs=1e-9)
        assert by_alpha[1.0][2] == pytest.approx(1.0, abs=1e-9)
        originals = {r[5] for r in rows}
        assert len(originals) == 1  # same original potentialness marker on every row


class TestStandardGames:
    def test_reference_values_and_verdicts(self, cache):
        rows = run_standard_games(cache, n_jordan=25)
        by_name = {r[0]: r for r in rows if not r[0].startswith("jordan")}
        assert by_name["matching_pennies"][2] == pytest.approx(0.0, abs=1e-9)
        assert by_name["prisoners_dilemma"][2] == pytest.approx(1.0, abs=1e-9)
        assert by_name["battle_of_sexes"][2] == pytest.approx(0.94, abs=0.01)
        assert by_name["shapley"][2] == pytest.approx(0.36, abs=0.01)
        converged = {name: r[5] for name, r in by_name.items()}
        assert converged == {
            "matching_pennies": False,
            "battle_of_sexes": True,
            "prisoners_dilemma": True,
            "shapley": False,
        }
        jordan = [r for r in rows if r[0].startswith("jordan")]
        assert len(jordan) == 25
        assert all(0.0 <= r[2] <= 0.5 for r in jordan)


class TestRuntimeBenchmark:
    def test_reports_construction_and_warm_timings(self, tmp_path, cache):
        rows, backends = run_runtime_benchmark(
            [GameShape.of((3, 3))], cache, tmp_path, n_runs=20
        )
        (setting, n, construction, per_game) = rows[0]
        assert setting == "2x3" and n == 20
        assert construction > 0 and per_game > 0
        assert per_game < 1.0  # warm potentialness is fast
        assert {b[1] for b in backends} >= {"python"}
        assert (tmp_path / "bench.csv").exists() and (tmp_path / "bench_omd.csv").exists()

    def test_repeated_timings_are_stable(self, cache):
        rows1, _ = run_runtime_benchmark([GameShape.of((2, 2))], cache, n_runs=50)
        rows2, _ = run_runtime_benchmark([GameShape.of((2, 2))], cache, n_runs=50)
        a, b = rows1[0][3], rows2[0][3]
        assert max(a, b) / min(a, b) < 1.5
