"""Tests for loss model construction, CDF/quantile machinery, and CSV input."""

import numpy as np
import pytest

from varsplit import (
    EmptySupport,
    Interval,
    InvalidBounds,
    InvalidLevel,
    CsvFormatError,
    NegativeLoss,
    ProbsNotNormalized,
    atoms,
    build_model,
    cdf,
    describe,
    distinct_atoms,
    empirical,
    intervals_from_cuts,
    load_losses_csv,
    mass_in,
    order_stat_rank,
    quantile_strict,
    sample,
    uniform,
)


class TestConstruction:
    def test_uniform_max_loss(self):
        model = uniform(0.0, 1.0)
        assert model.kind == "uniform"
        assert model.max_loss == 1.0

    def test_atoms_max_loss(self):
        model = atoms([0.0, 10.0], [0.5, 0.5])
        assert model.max_loss == 10.0

    def test_probs_must_sum_to_one(self):
        with pytest.raises(ProbsNotNormalized, match="sum to 1"):
            atoms([1.0], [0.9])

    def test_probs_must_be_positive(self):
        with pytest.raises(ProbsNotNormalized, match="strictly positive"):
            atoms([0.0, 1.0], [0.0, 1.0])

    def test_values_strictly_increasing(self):
        with pytest.raises(InvalidBounds, match="strictly increasing"):
            atoms([1.0, 1.0], [0.5, 0.5])

    def test_negative_values_rejected(self):
        with pytest.raises(NegativeLoss):
            atoms([-1.0, 1.0], [0.5, 0.5])
        with pytest.raises(NegativeLoss):
            empirical([-0.5, 1.0])
        with pytest.raises(NegativeLoss):
            uniform(-0.2, 1.0)

    def test_empty_support_rejected(self):
        with pytest.raises(EmptySupport):
            atoms([], [])
        with pytest.raises(EmptySupport):
            empirical([])

    def test_uniform_needs_ordered_bounds(self):
        with pytest.raises(InvalidBounds):
            uniform(1.0, 1.0)
        with pytest.raises(InvalidBounds):
            uniform(2.0, 1.0)

    def test_empirical_sorts_samples(self):
        model = empirical([3.0, 1.0, 2.0])
        assert list(model.samples) == [1.0, 2.0, 3.0]
        assert model.max_loss == 3.0

    def test_build_model_dispatch(self):
        u = build_model({"kind": "uniform", "lower": 0.0, "upper": 2.0})
        assert u.kind == "uniform" and u.max_loss == 2.0
        a = build_model({"kind": "atoms", "values": [1.0], "probs": [1.0]})
        assert a.kind == "atoms"
        e = build_model({"kind": "empirical", "samples": [1.0, 4.0]})
        assert e.kind == "empirical"
        with pytest.raises(InvalidBounds, match="unknown model kind"):
            build_model({"kind": "pareto"})

    def test_describe_is_deterministic(self):
        assert describe(uniform(0.0, 1.0)) == "uniform:0.0,1.0"
        assert describe(atoms([0.0, 10.0], [0.5, 0.5])) == "atoms:0.0:0.5,10.0:0.5"
        assert describe(empirical([1.0, 2.0])) == "empirical:n=2"


class TestCdf:
    def test_atom_mass_at_zero(self):
        assert cdf(atoms([0.0, 10.0], [0.5, 0.5]), 0.0) == 0.5

    def test_uniform_cdf(self):
        assert cdf(uniform(0.0, 1.0), 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_empirical_counting(self):
        assert cdf(empirical([1.0, 2.0, 2.0, 4.0]), 2.0) == 0.75

    def test_total_mass_at_max_loss(self):
        for model in (
            uniform(0.0, 1.0),
            atoms([0.0, 5.0, 10.0], [0.5, 0.3, 0.2]),
            empirical([1.0, 2.0, 2.0, 4.0]),
        ):
            assert cdf(model, model.max_loss) == 1.0
            assert cdf(model, -1e-9) == 0.0

    def test_nondecreasing_on_probe_grid(self):
        """cdf must be monotone over a dense grid for all three variants."""
        grid = np.linspace(-0.1, 1.1, 10**4)
        for model in (
            uniform(0.0, 1.0),
            atoms([0.0, 0.25, 0.5, 1.0], [0.1, 0.4, 0.3, 0.2]),
            empirical([0.0, 0.2, 0.2, 0.7, 1.0]),
        ):
            vals = np.array([cdf(model, float(x)) for x in grid])
            assert np.all(np.diff(vals) >= 0.0)

    def test_right_continuous_at_atoms(self):
        """The jump at an atom is included at the atom itself."""
        model = atoms([0.0, 5.0, 10.0], [0.5, 0.3, 0.2])
        assert cdf(model, 5.0) == 0.8
        assert cdf(model, 5.0 - 1e-12) == 0.5
        assert cdf(model, 5.0 + 1e-12) == 0.8


class TestQuantileStrict:
    def test_atom_scan_below_jump(self):
        assert quantile_strict(atoms([0.0, 10.0], [0.5, 0.5]), 0.4) == 0.0

    def test_atom_scan_above_jump(self):
        assert quantile_strict(atoms([0.0, 10.0], [0.5, 0.5]), 0.6) == 10.0

    def test_atom_boundary_uses_strict_inequality(self):
        """At p exactly on a CDF flat, the quantile moves to the next atom."""
        assert quantile_strict(atoms([0.0, 10.0], [0.5, 0.5]), 0.5) == 10.0

    def test_uniform_inverse(self):
        assert quantile_strict(uniform(0.0, 1.0), 0.95) == 0.95

    def test_empirical_order_statistic(self):
        model = empirical([1.0, 2.0, 2.0, 4.0])
        assert quantile_strict(model, 0.5) == 2.0
        assert quantile_strict(model, 0.74) == 2.0
        assert quantile_strict(model, 0.75) == 4.0

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
    def test_level_out_of_range(self, p):
        with pytest.raises(InvalidLevel):
            quantile_strict(uniform(0.0, 1.0), p)

    def test_order_stat_rank(self):
        assert order_stat_rank(4, 0.5) == 3
        assert order_stat_rank(4, 0.74) == 3
        assert order_stat_rank(4, 0.75) == 4
        assert order_stat_rank(100, 0.95) == 96
        assert order_stat_rank(4, 0.999) == 4

    def test_galois_pair(self):
        """q = inf{x : cdf(x) > p}: mass above q exceeds p, mass below never does."""
        discrete = (
            atoms([0.0, 5.0, 10.0], [0.5, 0.3, 0.2]),
            empirical([1.0, 2.0, 2.0, 4.0, 7.0]),
        )
        levels = np.linspace(0.01, 0.99, 49)
        for model in discrete:
            for p in levels:
                q = quantile_strict(model, float(p))
                assert cdf(model, q) > p
                assert cdf(model, q - 1e-9) <= p
        continuous = uniform(0.0, 1.0)
        for p in levels:
            q = quantile_strict(continuous, float(p))
            assert cdf(continuous, q + 1e-9) > p
            assert cdf(continuous, q - 1e-9) <= p


class TestMassIn:
    def test_uniform_interval_length(self):
        got = mass_in(uniform(0.0, 1.0), Interval(0.2, 0.3))
        assert got == pytest.approx(0.1, abs=1e-12)

    def test_half_open_convention_on_atoms(self):
        """[0, 10) keeps the atom at 0 and drops the atom at 10."""
        model = atoms([0.0, 10.0], [0.5, 0.5])
        assert mass_in(model, Interval(0.0, 10.0)) == 0.5
        assert mass_in(model, Interval(0.0, 10.0, closed_hi=True)) == 1.0

    def test_empirical_counts(self):
        model = empirical([1.0, 2.0, 2.0, 4.0])
        assert mass_in(model, Interval(2.0, 4.0)) == 0.5
        assert mass_in(model, Interval(2.0, 4.0, closed_hi=True)) == 0.75

    @pytest.mark.parametrize(
        "model",
        [
            uniform(0.0, 1.0),
            atoms([0.0, 0.3, 0.7, 1.0], [0.25, 0.25, 0.25, 0.25]),
            empirical([0.0, 0.1, 0.4, 0.4, 0.9, 1.0]),
        ],
    )
    def test_partition_masses_sum_to_one(self, model):
        cuts = [0.0, 0.15, 0.35, 0.55, 0.8, 1.0]
        total = sum(mass_in(model, iv) for iv in intervals_from_cuts(cuts))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestIntervals:
    def test_last_interval_is_closed(self):
        ivs = intervals_from_cuts([0.0, 0.5, 1.0])
        assert [iv.closed_hi for iv in ivs] == [False, True]
        assert ivs[0].contains(0.0) and not ivs[0].contains(0.5)
        assert ivs[1].contains(0.5) and ivs[1].contains(1.0)

    def test_every_point_lands_in_exactly_one(self):
        ivs = intervals_from_cuts([0.0, 0.25, 0.5, 1.0])
        for x in (0.0, 0.1, 0.25, 0.49999, 0.5, 0.75, 1.0):
            assert sum(iv.contains(x) for iv in ivs) == 1

    def test_interval_validation(self):
        with pytest.raises(InvalidBounds):
            Interval(0.5, 0.5)
        with pytest.raises(InvalidBounds):
            Interval(-0.1, 0.5)
        with pytest.raises(InvalidBounds):
            intervals_from_cuts([0.0])


class TestSampling:
    def test_degenerate_distribution(self):
        got = sample(atoms([5.0], [1.0]), seed=7, n=3)
        assert list(got) == [5.0, 5.0, 5.0]

    def test_uniform_mean(self):
        got = sample(uniform(0.0, 1.0), seed=1, n=10**5)
        assert abs(float(np.mean(got)) - 0.5) < 0.01

    def test_determinism(self):
        model = atoms([0.0, 5.0, 10.0], [0.5, 0.3, 0.2])
        first = sample(model, seed=123, n=1000)
        second = sample(model, seed=123, n=1000)
        np.testing.assert_array_equal(first, second)
        assert set(np.unique(first)) <= {0.0, 5.0, 10.0}

    def test_seed_changes_stream(self):
        a = sample(uniform(0.0, 1.0), seed=1, n=100)
        b = sample(uniform(0.0, 1.0), seed=2, n=100)
        assert not np.array_equal(a, b)

    def test_empirical_resampling_stays_in_support(self):
        model = empirical([1.0, 2.0, 4.0])
        got = sample(model, seed=5, n=500)
        assert set(np.unique(got)) <= {1.0, 2.0, 4.0}

    def test_empirical_cdf_converges(self):
        """10^5 draws land within the 0.02 sup-distance budget of the source law."""
        source = uniform(0.0, 1.0)
        emp = empirical(sample(source, seed=10, n=10**5))
        grid = np.linspace(0.0, 1.0, 201)
        worst = max(abs(cdf(emp, float(x)) - cdf(source, float(x))) for x in grid)
        assert worst <= 0.02


class TestDistinctAtoms:
    def test_atoms_passthrough(self):
        values, probs = distinct_atoms(atoms([0.0, 2.0], [0.25, 0.75]))
        assert list(values) == [0.0, 2.0]
        assert list(probs) == [0.25, 0.75]

    def test_empirical_collapses_ties(self):
        values, probs = distinct_atoms(empirical([1.0, 2.0, 2.0, 4.0]))
        assert list(values) == [1.0, 2.0, 4.0]
        assert list(probs) == [0.25, 0.5, 0.25]

    def test_uniform_has_no_atoms(self):
        with pytest.raises(InvalidBounds):
            distinct_atoms(uniform(0.0, 1.0))


class TestCsvIngestion:
    def _write(self, tmp_path, text):
        path = tmp_path / "losses.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_round_trip(self, tmp_path):
        path = self._write(tmp_path, "loss\n3.5\n1.25\n0\n")
        model = load_losses_csv(path)
        assert model.kind == "empirical"
        assert list(model.samples) == [0.0, 1.25, 3.5]

    def test_header_required(self, tmp_path):
        path = self._write(tmp_path, "value\n1.0\n")
        with pytest.raises(CsvFormatError, match="header must be 'loss'"):
            load_losses_csv(path)

    def test_empty_file(self, tmp_path):
        path = self._write(tmp_path, "")
        with pytest.raises(CsvFormatError, match="file is empty"):
            load_losses_csv(path)

    def test_no_data_rows(self, tmp_path):
        path = self._write(tmp_path, "loss\n")
        with pytest.raises(EmptySupport, match="no loss rows"):
            load_losses_csv(path)

    def test_non_numeric_row_is_named(self, tmp_path):
        path = self._write(tmp_path, "loss\n1.0\nabc\n")
        with pytest.raises(CsvFormatError, match="row 3: not a number"):
            load_losses_csv(path)

    def test_negative_row_is_named(self, tmp_path):
        path = self._write(tmp_path, "loss\n1.0\n-3\n")
        with pytest.raises(NegativeLoss, match="row 3: negative loss"):
            load_losses_csv(path)

    def test_extra_column_rejected(self, tmp_path):
        path = self._write(tmp_path, "loss\n1.0,2.0\n")
        with pytest.raises(CsvFormatError, match="row 2: expected one column"):
            load_losses_csv(path)

    def test_non_finite_rejected(self, tmp_path):
        path = self._write(tmp_path, "loss\ninf\n")
        with pytest.raises(CsvFormatError, match="row 2: non-finite"):
            load_losses_csv(path)
