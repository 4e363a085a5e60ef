import dataclasses
import json
import math
import os
import random
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from pollination.core import AggregationError, ComparisonError, ConfigError, DimensionError, PlotError, UnknownFunctionError
from pollination.harness import (
    ConvergenceTrace,
    ExperimentConfig,
    compare_algorithms,
    compare_statistics,
    compute_statistics,
    emit_convergence_plot,
    emit_table,
    format_sci,
    load_experiment_config,
    run_experiment,
)
from pollination.harness.experiment import default_generations
from sweep import pair


def tiny(**kw):
    base = dict(function="sphere", dimension=3, runs=4, swarm_size=6, max_generations=15, seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def naive_stats(values):
    n = len(values)
    s = sorted(values)
    mean = sum(values) / n
    median = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / n)
    return s[0], s[-1], mean, median, sd


class TestComputeStatistics:
    def test_one_two_three(self):
        s = compute_statistics([1, 2, 3])
        assert (s.best, s.worst, s.mean, s.median) == (1, 3, 2, 2)
        assert s.sd == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
        assert s.sd == pytest.approx(0.8165, abs=5e-5)

    def test_single(self):
        s = compute_statistics([5])
        assert (s.best, s.worst, s.mean, s.median, s.sd, s.runs) == (5, 5, 5, 5, 0.0, 1)

    def test_constant(self):
        assert compute_statistics([2, 2, 2, 2]).sd == 0.0
        # a value whose naive mean would not round-trip
        assert compute_statistics([0.1] * 7).sd == 0.0

    def test_even_median(self):
        assert compute_statistics([4, 1, 3, 2]).median == 2.5

    def test_negative_best_is_most_negative(self):
        s = compute_statistics([-60.5, -78.3, -70.0])
        assert s.best == -78.3 and s.worst == -60.5

    @pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
    def test_rejects(self, bad):
        with pytest.raises(AggregationError):
            compute_statistics(bad)

    def test_matches_naive_reference(self):
        rng = random.Random(0)
        for _ in range(1000):
            n = rng.randint(1, 60)
            scale = 10 ** rng.uniform(-8, 4)
            values = [rng.gauss(rng.uniform(-100, 100), scale) for _ in range(n)]
            s = compute_statistics(values)
            ref = naive_stats(values)
            for got, want in zip((s.best, s.worst, s.mean, s.median, s.sd), ref):
                assert got == pytest.approx(want, rel=1e-9, abs=1e-9 * scale)

    def test_invariants_and_permutation(self):
        rng = random.Random(1)
        for _ in range(200):
            values = [rng.expovariate(1.0) for _ in range(rng.randint(1, 40))]
            s = compute_statistics(values)
            assert s.best <= s.median <= s.worst
            assert s.best <= s.mean <= s.worst
            assert s.sd >= 0
            shuffled = values[:]
            rng.shuffle(shuffled)
            assert compute_statistics(shuffled) == s


class TestConvergenceTrace:
    def test_envelope(self):
        tr = ConvergenceTrace.from_traces([[3, 2, 1], [5, 5, 0]])
        np.testing.assert_array_equal(tr.mean, [4, 3.5, 0.5])
        np.testing.assert_array_equal(tr.lower, [3, 2, 0])
        np.testing.assert_array_equal(tr.upper, [5, 5, 1])
        assert not tr.all_positive()

    def test_ragged_rejected(self):
        with pytest.raises((AggregationError, ValueError)):
            ConvergenceTrace.from_traces([[1, 2], [1]])


class TestExperimentConfig:
    def test_grid_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.runs, cfg.swarm_size) == (100, 50)
        for d, gens, p in [(10, 1000, 0.5), (30, 1500, 0.2), (50, 2500, 0.1)]:
            c = ExperimentConfig(dimension=d)
            assert (c.generations, c.effective_switch_probability) == (gens, p)

    def test_original_default_p(self):
        assert ExperimentConfig(algorithm="original").effective_switch_probability == 0.8

    @pytest.mark.parametrize("dim, gens", [(2, 1000), (20, 1000), (21, 1500), (40, 1500), (41, 2500), (100, 2500)])
    def test_other_dimensions(self, dim, gens):
        assert default_generations(dim) == gens

    @pytest.mark.parametrize(
        "kw",
        [{"runs": 0}, {"algorithm": "fancy"}, {"algorithm": "proposed", "switch_probability": 0.3}, {"schedule": "10:2"}],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kw)

    def test_from_dict_rejects_unknown_and_version(self):
        with pytest.raises(ConfigError, match="nonsense"):
            ExperimentConfig.from_dict({"nonsense": 1})
        with pytest.raises(ConfigError, match="schema_version"):
            ExperimentConfig.from_dict({"schema_version": 2})

    def test_echo_is_self_describing(self):
        echo = tiny().echo()
        for key in ("swarm_size", "max_generations", "schedule", "levy_exponent", "global_step_scale",
                    "seed", "eq1_sign", "literal_himmelblau", "effective_switch_probability"):
            assert key in echo
        assert "out_dir" not in echo and "workers" not in echo


class TestRunExperiment:
    def test_single_run_degenerate(self):
        s = run_experiment(tiny(runs=1)).statistics
        assert s.best == s.worst == s.mean == s.median
        assert s.sd == 0.0

    def test_layout(self, tmp_path):
        res = run_experiment(tiny(out_dir=str(tmp_path), algorithm="original"))
        d = tmp_path / "sphere_3_original"
        assert res.directory == d
        assert sorted(p.name for p in d.iterdir()) == ["plot.svg", "runs.json", "stats.csv", "trace.csv"]
        record = json.loads((d / "runs.json").read_text())
        assert record["schema_version"] == 1
        assert record["library_version"]
        assert record["statistics"]["sd_divisor"] == "N"
        assert [r["run_index"] for r in record["runs"]] == [0, 1, 2, 3]
        assert record["config"]["switch_probability"] == 0.8

    def test_byte_identical(self, tmp_path):
        for sub in ("a", "b"):
            run_experiment(tiny(out_dir=str(tmp_path / sub), algorithm="proposed"))
        for name in ("runs.json", "stats.csv", "trace.csv", "plot.svg"):
            a = (tmp_path / "a" / "sphere_3_proposed" / name).read_bytes()
            b = (tmp_path / "b" / "sphere_3_proposed" / name).read_bytes()
            assert a == b, name

    def test_reaggregate_from_records(self, tmp_path):
        res = run_experiment(tiny(out_dir=str(tmp_path), function="griewank"))
        record = json.loads((res.directory / "runs.json").read_text())
        again = compute_statistics([r["best_fitness"] for r in record["runs"]])
        assert again.as_dict() == record["statistics"]
        assert again == res.statistics

    def test_rerun_from_persisted_config(self, tmp_path):
        res = run_experiment(tiny(out_dir=str(tmp_path), function="zakharov", algorithm="original", switch_probability=0.6))
        cfg = load_experiment_config(res.directory / "runs.json")
        assert cfg.switch_probability == 0.6
        assert run_experiment(cfg).statistics == res.statistics
        res_p = run_experiment(tiny(out_dir=str(tmp_path), function="zakharov"))
        assert run_experiment(load_experiment_config(res_p.directory / "runs.json")).statistics == res_p.statistics

    def test_runs_are_prefix_stable(self):
        short = run_experiment(tiny(runs=3)).final_values
        long = run_experiment(tiny(runs=7)).final_values
        assert long[:3] == short

    def test_workers_do_not_change_results(self):
        serial = run_experiment(tiny(runs=5))
        parallel = run_experiment(tiny(runs=5, workers=3))
        assert serial.final_values == parallel.final_values
        assert serial.statistics == parallel.statistics

    def test_errors(self):
        with pytest.raises(UnknownFunctionError):
            run_experiment(tiny(function="nosuch"))
        with pytest.raises(DimensionError):
            run_experiment(tiny(function="rosenbrock", dimension=1))

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unwritable_directory(self, tmp_path):
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(0o500)
        try:
            with pytest.raises(OSError, match="locked"):
                run_experiment(tiny(out_dir=str(locked / "out")))
        finally:
            locked.chmod(0o700)

    def test_output_path_is_a_file(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        with pytest.raises(OSError, match="blocker"):
            run_experiment(tiny(out_dir=str(blocker)))


class TestComparison:
    def test_self_comparison_ties(self):
        cfg = tiny(algorithm="original")
        rec = compare_algorithms(cfg, cfg)
        assert rec.comparison.better == "tie"
        assert rec.comparison.mean_ratio == 1.0
        assert rec.comparison.better_label is None
        assert rec.comparison.rank_sum_p == 1.0

    @pytest.mark.parametrize(
        "change", [{"function": "griewank"}, {"dimension": 4}, {"runs": 5}, {"max_generations": 16}, {"swarm_size": 7}]
    )
    def test_mismatch(self, change):
        a = tiny(algorithm="original")
        with pytest.raises(ComparisonError):
            compare_algorithms(a, dataclasses.replace(a, **change))

    def test_flags_lower_mean(self):
        c = compare_statistics([3.0, 4.0], [1.0, 2.0], "sphere", 10, "FPA", "Proposed FPA")
        assert c.better == "b" and c.better_label == "Proposed FPA"
        assert c.mean_ratio == pytest.approx(1.5 / 3.5)

    def test_negative_means(self):
        c = compare_statistics([-33.0, -34.0], [-39.0, -40.0], "himmelblau", 50)
        assert c.better == "b"

    def test_rank_sum_labelled(self):
        c = compare_statistics([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], "sphere", 10)
        d = c.as_dict()
        assert d["rank_sum"]["note"] == "artifact extension"
        assert 0.0 < d["rank_sum"]["p_value"] <= 1.0

    @pytest.mark.slow
    def test_sphere_d30_proposed_flagged_better(self):
        original, proposed, _ = pair("sphere", 30)
        c = compare_statistics(original.final_values, proposed.final_values, "sphere", 30, "FPA", "Proposed FPA")
        assert c.better_label == "Proposed FPA"

    @pytest.mark.slow
    def test_himmelblau_d50_proposed_flagged_better(self):
        original, proposed, _ = pair("himmelblau", 50)
        c = compare_statistics(original.final_values, proposed.final_values, "himmelblau", 50, "FPA", "Proposed FPA")
        assert c.better_label == "Proposed FPA"


class TestTable:
    def test_format(self):
        assert format_sci(0.1536) == "1.54E-01"
        assert format_sci(1.54) == "1.54E+00"
        assert format_sci(0.0) == "0.00E+00"
        assert format_sci(-39.7) == "-3.97E+01"

    def test_one_record_two_rows(self, tmp_path):
        rec = compare_algorithms(tiny(algorithm="original"), tiny())
        path = emit_table([rec], tmp_path / "t.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "Function,Name,Algorithm,Dimension,Best,Worst,Mean,Median,SD"
        assert len(lines) == 3
        assert lines[1].startswith("4,Sphere,FPA,3,")
        assert lines[2].startswith("4,Sphere,Proposed FPA,3,")

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_table([], tmp_path / "t.csv")

    def test_io_error_names_path(self, tmp_path):
        rec = compare_algorithms(tiny(algorithm="original"), tiny())
        (tmp_path / "f").write_text("")
        with pytest.raises(OSError, match="f/t.csv"):
            emit_table([rec], tmp_path / "f" / "t.csv")


class TestPlot:
    def traces(self, positive=True, gens=1000):
        g = np.arange(1, gens + 1, dtype=float)
        base = 1.0 / g if positive else -1.0 - np.log(g)
        return [ConvergenceTrace(base, base * 0.9, base * 1.1), ConvergenceTrace(base / 2, base / 3, base)]

    def test_two_traces_one_panel(self, tmp_path):
        svg, raw = emit_convergence_plot(self.traces(), ["FPA", "Proposed FPA"], tmp_path / "p.svg")
        assert svg.exists() and raw == tmp_path / "p.csv"
        ET.parse(svg)
        # text is drawn as glyph paths; matplotlib keeps each string in a comment
        text = svg.read_text()
        assert "FPA" in text and "Proposed FPA" in text
        rows = raw.read_text().splitlines()
        assert rows[0] == "panel,label,generation,mean,min,max"
        assert len(rows) == 1 + 2 * 1000

    def test_log_axis_only_when_positive(self, tmp_path):
        import matplotlib.pyplot as plt

        captured = {}
        original_savefig = plt.Figure.savefig

        def spy(fig, *a, **kw):
            captured["scales"] = [ax.get_yscale() for ax in fig.axes]
            return original_savefig(fig, *a, **kw)

        plt.Figure.savefig = spy
        try:
            emit_convergence_plot(self.traces(positive=False), ["FPA", "Proposed FPA"], tmp_path / "h.svg")
            neg = captured["scales"]
            emit_convergence_plot(self.traces(), ["FPA", "Proposed FPA"], tmp_path / "s.svg")
            pos = captured["scales"]
        finally:
            plt.Figure.savefig = original_savefig
        assert neg == ["linear"]
        assert pos == ["log"]

    def test_panels(self, tmp_path):
        tr = self.traces(gens=10) + self.traces(gens=20)
        svg, raw = emit_convergence_plot(tr, ["FPA", "Proposed FPA"] * 2, tmp_path / "g.svg", panels=[10, 10, 30, 30])
        assert "Dimension 30" in svg.read_text()
        assert len(raw.read_text().splitlines()) == 1 + 2 * 10 + 2 * 20

    def test_empty(self, tmp_path):
        with pytest.raises(PlotError):
            emit_convergence_plot([], [], tmp_path / "x.svg")

    def test_mismatched_lengths(self, tmp_path):
        tr = self.traces(gens=10)[:1] + self.traces(gens=11)[:1]
        with pytest.raises(PlotError, match="lengths"):
            emit_convergence_plot(tr, ["FPA", "Proposed FPA"], tmp_path / "x.svg")

    def test_label_count(self, tmp_path):
        with pytest.raises(PlotError):
            emit_convergence_plot(self.traces(), ["FPA"], tmp_path / "x.svg")

    def test_deterministic_bytes(self, tmp_path):
        a, _ = emit_convergence_plot(self.traces(gens=50), ["FPA", "Proposed FPA"], tmp_path / "a.svg")
        b, _ = emit_convergence_plot(self.traces(gens=50), ["FPA", "Proposed FPA"], tmp_path / "b.svg")
        assert a.read_bytes() == b.read_bytes()


@pytest.mark.slow
def test_griewank_d50_proposed_mean_below_three():
    _, proposed, _ = pair("griewank", 50)
    assert proposed.statistics.mean < 3.0
