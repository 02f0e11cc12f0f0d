import numpy as np
import pytest

from modgraph import (
    ParameterError,
    build_dynamic_graph,
    detect_segments,
    generate,
    generate_plateau_fixture,
    modularity_curve,
    write_run,
)
from modgraph.synth import SynthSpec, linear_schedule, plateau_schedule


def small_spec(**overrides):
    base = dict(
        n_samples=60, n_classes=4, n_features=32, n_layers=5,
        separation_schedule=linear_schedule(0.5, 2.0, 5), noise_sigma=0.4, seed=0,
    )
    base.update(overrides)
    return SynthSpec(**base)


class TestSpecValidation:
    def test_classes_exceed_samples(self):
        with pytest.raises(ParameterError):
            small_spec(n_samples=3)

    def test_schedule_length_mismatch(self):
        with pytest.raises(ParameterError):
            small_spec(separation_schedule=(1.0, 2.0))

    def test_negative_schedule(self):
        with pytest.raises(ParameterError):
            small_spec(separation_schedule=(0.5, 1.0, 1.5, -0.1, 2.0))

    def test_nonpositive_sigma(self):
        with pytest.raises(ParameterError):
            small_spec(noise_sigma=0.0)

    def test_single_class(self):
        with pytest.raises(ParameterError):
            small_spec(n_classes=1)


class TestGenerate:
    def test_deterministic_in_memory(self):
        a, b = generate(small_spec()), generate(small_spec())
        for fa, fb in zip(a.features, b.features):
            assert fa.data.tobytes() == fb.data.tobytes()
        assert np.array_equal(a.labels.labels, b.labels.labels)

    def test_deterministic_on_disk(self, tmp_path):
        write_run(generate(small_spec()), tmp_path / "r1")
        write_run(generate(small_spec()), tmp_path / "r2")
        for name in sorted(p.name for p in (tmp_path / "r1").iterdir()):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_seed_changes_output(self):
        a, b = generate(small_spec(seed=0)), generate(small_spec(seed=1))
        assert a.features[0].data.tobytes() != b.features[0].data.tobytes()

    def test_label_balance(self):
        run = generate(small_spec(n_samples=62, n_classes=4))
        counts = np.bincount(run.labels.labels, minlength=4)
        assert counts.max() - counts.min() <= 1

    def test_layer_shapes_and_names(self):
        run = generate(small_spec())
        assert run.n_layers == 5
        assert run.layer_names == tuple(f"layer_{i:02d}" for i in range(5))
        assert all(f.data.shape == (60, 32) for f in run.features)

    def test_zero_schedule_is_pure_noise(self):
        run = generate(small_spec(separation_schedule=(0.0,) * 5))
        # per-class means should hover near zero, far below the noise scale
        f = run.features[0].data
        class_means = [f[run.labels.labels == c].mean(axis=0) for c in range(4)]
        assert max(np.abs(m).max() for m in class_means) < 0.4


class TestPlateauSchedule:
    def test_constant_inside_increasing_outside(self):
        spec = small_spec(n_layers=8, separation_schedule=linear_schedule(0.8, 2.4, 8))
        sched = np.array(plateau_schedule(spec, (3, 5)))
        assert sched[3] == sched[4] == sched[5]
        deltas = np.diff(sched)
        assert (deltas[[0, 1, 2, 5, 6]] > 0).all()  # every step outside the plateau rises
        assert (deltas[[3, 4]] == 0).all()
        assert sched[0] == 0.8 and sched[-1] == 2.4

    def test_whole_range_is_constant(self):
        spec = small_spec(n_layers=6, separation_schedule=linear_schedule(0.8, 2.4, 6))
        sched = plateau_schedule(spec, (0, 5))
        assert len(set(sched)) == 1

    def test_range_validation(self):
        spec = small_spec()
        with pytest.raises(ParameterError):
            plateau_schedule(spec, (3, 9))
        with pytest.raises(ParameterError):
            plateau_schedule(spec, (-1, 2))
        with pytest.raises(ParameterError):
            plateau_schedule(spec, (4, 2))


def fixture_curve(spec, plateau_range):
    run = generate_plateau_fixture(spec, plateau_range)
    return run, modularity_curve(build_dynamic_graph(run, metric="cosine", k=3))


class TestPlateauFixture:
    SPEC = SynthSpec(
        n_samples=300, n_classes=6, n_features=128, n_layers=8,
        separation_schedule=linear_schedule(0.8, 2.4, 8), noise_sigma=0.4, seed=3,
    )

    def test_detects_exactly_the_interval(self):
        _, curve = fixture_curve(self.SPEC, (3, 5))
        segs = detect_segments(curve, epsilon=0.005)
        assert segs.plateaus == ((3, 5),)
        assert segs.descents == ()

    def test_plateau_layers_flagged_repeatable(self):
        run, _ = fixture_curve(self.SPEC, (3, 5))
        flags = [e.repeatable for e in run.manifest.layers]
        assert flags == [False, False, False, True, True, True, False, False]

    def test_no_plateau_when_range_empty(self):
        from dataclasses import replace

        for seed in range(5):
            _, curve = fixture_curve(replace(self.SPEC, seed=seed), None)
            segs = detect_segments(curve, epsilon=0.005)
            assert segs.plateaus == ()
            assert segs.descents == ()

    def test_whole_curve_plateau(self):
        _, curve = fixture_curve(self.SPEC, (0, 7))
        segs = detect_segments(curve, epsilon=0.005)
        assert segs.plateaus == ((0, 7),)

    def test_deterministic(self):
        a = generate_plateau_fixture(self.SPEC, (3, 5))
        b = generate_plateau_fixture(self.SPEC, (3, 5))
        for fa, fb in zip(a.features, b.features):
            assert fa.data.tobytes() == fb.data.tobytes()


def test_monotone_link_between_separation_and_modularity():
    # one layer's separation raised from 1.2 to 1.8 must raise that layer's
    # expected modularity (20-seed means, one-sided slack 0.01)
    def mean_q(sep):
        qs = []
        for seed in range(20):
            spec = SynthSpec(
                n_samples=300, n_classes=6, n_features=128, n_layers=2,
                separation_schedule=(0.5, sep), noise_sigma=0.4, seed=seed,
            )
            curve = modularity_curve(build_dynamic_graph(generate(spec), k=3))
            qs.append(curve.values[1])
        return float(np.mean(qs))

    assert mean_q(1.8) > mean_q(1.2) - 0.01
