#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <polaffini/evaluation.hpp>
#include <polaffini/synth.hpp>

#include <map>
#include <numbers>

#include "oracles.hpp"

using namespace polaffini;

namespace {

LabelVolume blank(int n, double spacing = 1.0) {
    AffineTransform v2w = AffineTransform::identity(3);
    v2w.linear *= spacing;
    for (int a = 0; a < 3; ++a)
        v2w.translation(a) = -0.5 * spacing * (n - 1);
    return make_label_volume(make_grid({n, n, n}, v2w));
}

}  // namespace

TEST_CASE("dice: identical, disjoint, half-overlapping") {
    SynthSpec spec;
    spec.seed = 10;
    spec.n_regions = 7;
    spec.dims = {20, 20, 20};
    const LabelVolume vol = generate(spec).reference;

    const OverlapReport same = dice(vol, vol);
    CHECK(same.labels_evaluated == 7);
    CHECK(same.mean_dice == 1.0);
    for (const auto& [label, d] : same.per_label)
        CHECK(d == 1.0);

    LabelVolume a = blank(10), b = blank(10);
    a.data[a.grid.index(2, 2, 2)] = 1;
    b.data[b.grid.index(7, 7, 7)] = 1;
    const OverlapReport disjoint = dice(a, b);
    CHECK(disjoint.per_label.at(1) == 0.0);

    // 2x2x2 blob against a copy shifted by one voxel along x: 4 of 8 overlap.
    LabelVolume c = blank(10), d = blank(10);
    for (int k = 4; k < 6; ++k)
        for (int j = 4; j < 6; ++j)
            for (int i = 4; i < 6; ++i) {
                c.data[c.grid.index(i, j, k)] = 3;
                d.data[d.grid.index(i + 1, j, k)] = 3;
            }
    CHECK(dice(c, d).per_label.at(3) == 0.5);
}

TEST_CASE("dice matches the exhaustive counting oracle on random volumes") {
    std::uint64_t s = 77;
    LabelVolume a = blank(12), b = blank(12);
    for (std::int64_t v = 0; v < a.grid.voxel_count(); ++v) {
        a.data[v] = static_cast<std::int32_t>(oracle::next_state(s) % 5);
        b.data[v] = static_cast<std::int32_t>(oracle::next_state(s) % 5);
    }
    const OverlapReport got = dice(a, b);

    std::map<int, std::int64_t> ca, cb, inter;
    for (std::int64_t v = 0; v < a.grid.voxel_count(); ++v) {
        if (a.data[v] != 0)
            ++ca[a.data[v]];
        if (b.data[v] != 0)
            ++cb[b.data[v]];
        if (a.data[v] != 0 && a.data[v] == b.data[v])
            ++inter[a.data[v]];
    }
    for (int label = 1; label <= 4; ++label) {
        const double expected = 2.0 * inter[label] / static_cast<double>(ca[label] + cb[label]);
        CHECK(got.per_label.at(label) == expected);
    }

    // Symmetry and permutation invariance.
    const OverlapReport rev = dice(b, a);
    for (const auto& [label, d] : got.per_label)
        CHECK(rev.per_label.at(label) == d);

    LabelVolume ap = a, bp = b;
    auto permute = [](std::int32_t l) { return l == 0 ? 0 : (l % 4) + 1; };
    for (std::int64_t v = 0; v < a.grid.voxel_count(); ++v) {
        ap.data[v] = permute(a.data[v]);
        bp.data[v] = permute(b.data[v]);
    }
    const OverlapReport perm = dice(ap, bp);
    for (int label = 1; label <= 4; ++label)
        CHECK(perm.per_label.at(permute(label)) == got.per_label.at(label));
}

TEST_CASE("dice applies merges before counting and rejects grid mismatches") {
    LabelVolume a = blank(8), b = blank(8);
    a.data[a.grid.index(1, 1, 1)] = 1;
    a.data[a.grid.index(2, 1, 1)] = 2;
    b.data[b.grid.index(1, 1, 1)] = 2;
    b.data[b.grid.index(2, 1, 1)] = 1;

    CHECK(dice(a, b).per_label.at(1) == 0.0);

    LabelSelection sel;
    sel.merge_map[2] = 1;
    const OverlapReport merged = dice(a, b, sel);
    CHECK(merged.per_label.at(1) == 1.0);
    CHECK(merged.labels_evaluated == 1);

    CHECK_THROWS_AS((void)dice(a, blank(9)), grid_mismatch);
}

TEST_CASE("weighted mean dice uses voxel counts") {
    LabelVolume a = blank(8), b = blank(8);
    // Label 1: 10 voxels, fully overlapping. Label 2: 2 voxels, disjoint.
    for (int i = 0; i < 5; ++i) {
        a.data[a.grid.index(i, 1, 1)] = 1;
        b.data[b.grid.index(i, 1, 1)] = 1;
        a.data[a.grid.index(i, 2, 1)] = 1;
        b.data[b.grid.index(i, 2, 1)] = 1;
    }
    a.data[a.grid.index(1, 5, 5)] = 2;
    b.data[b.grid.index(6, 5, 5)] = 2;
    const OverlapReport r = dice(a, b);
    CHECK(r.mean_dice == 0.5);
    CHECK(r.weighted_mean_dice == doctest::Approx(20.0 / 22.0).epsilon(1e-12));
}

TEST_CASE("jacobian: identity and global scaling") {
    const Grid grid = blank(12, 2.0).grid;
    VectorField zero = make_vector_field(grid);
    const JacobianReport id = jacobian_report(zero);
    CHECK(id.negative_count == 0);
    CHECK(id.interior_voxels == 10 * 10 * 10);
    CHECK(id.min_det == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id.max_det == doctest::Approx(1.0).epsilon(1e-12));

    // T(x) = 2x: displacement x, determinant 8 everywhere.
    VectorField scale = make_vector_field(grid);
    for (int k = 0; k < 12; ++k)
        for (int j = 0; j < 12; ++j)
            for (int i = 0; i < 12; ++i)
                scale.set(grid.index(i, j, k), grid.world_at(i, j, k));
    const JacobianReport s2 = jacobian_report(scale);
    CHECK(s2.negative_count == 0);
    CHECK(s2.min_det == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(s2.max_det == doctest::Approx(8.0).epsilon(1e-6));

    CHECK_THROWS_AS((void)jacobian_report(make_vector_field(blank(2).grid)), grid_too_small);
}

TEST_CASE("jacobian of an affine-only result equals det(L) on the interior") {
    const AffineTransform a = random_affine(9, 0.5, 0.6, 1.8, 0.2, 6.0);
    const Grid grid = blank(10, 1.5).grid;
    VectorField disp = make_vector_field(grid);
    for (int k = 0; k < 10; ++k)
        for (int j = 0; j < 10; ++j)
            for (int i = 0; i < 10; ++i) {
                const Eigen::Vector3d x = grid.world_at(i, j, k);
                disp.set(grid.index(i, j, k), a.apply3(x) - x);
            }
    const JacobianReport r = jacobian_report(disp);
    const double expected = a.linear.determinant();
    CHECK(r.min_det == doctest::Approx(expected).epsilon(1e-6));
    CHECK(r.max_det == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("a deliberately folded field is counted against the analytic oracle") {
    SynthSpec spec;
    spec.seed = 31;
    spec.n_regions = 6;
    spec.dims = {24, 24, 24};
    spec.spacing_mm = 2.0;
    spec.warp = WarpKind::sinusoidal_fold;
    spec.fold_amplitude_mm = 12.0;
    spec.fold_period_mm = 24.0;
    const SynthResult synth = generate(spec);

    const JacobianReport r = jacobian_report(synth.gt_full_displacement);
    CHECK(r.negative_count > 0);

    // Central differences of a sampled sine attenuate it by sinc(w h); the
    // expected count follows from the same closed form.
    const Grid& grid = synth.gt_full_displacement.grid;
    const double w = 2.0 * std::numbers::pi / spec.fold_period_mm;
    const double h = spec.spacing_mm;
    const double gain = spec.fold_amplitude_mm * w * (std::sin(w * h) / (w * h));
    std::int64_t expected = 0;
    for (int k = 1; k < 23; ++k)
        for (int j = 1; j < 23; ++j)
            for (int i = 1; i < 23; ++i)
                if (1.0 + gain * std::cos(w * grid.world_at(i, j, k)[0]) < 0.0)
                    ++expected;
    CHECK(r.negative_count == expected);
}

TEST_CASE("report formatting") {
    LabelVolume a = blank(6);
    a.data[a.grid.index(1, 1, 1)] = 4;
    const OverlapReport r = dice(a, a);
    CHECK(to_json(r).find("\"mean_dice\": 1") != std::string::npos);
    CHECK(to_table(r).find("mean") != std::string::npos);

    const JacobianReport j = jacobian_report(make_vector_field(blank(5).grid));
    CHECK(to_json(j).find("\"negative_count\": 0") != std::string::npos);
    CHECK(to_table(j).find("negative: 0") != std::string::npos);
}
