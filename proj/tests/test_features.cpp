#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <polaffini/features.hpp>
#include <polaffini/synth.hpp>

#include <map>

#include "oracles.hpp"

using namespace polaffini;

namespace {

LabelVolume empty_volume(int n, double spacing = 1.0, Eigen::Vector3d origin = {0, 0, 0}) {
    AffineTransform v2w = AffineTransform::identity(3);
    v2w.linear *= spacing;
    v2w.translation = origin;
    return make_label_volume(make_grid({n, n, n}, v2w));
}

}  // namespace

TEST_CASE("centroid of a single voxel is its world position") {
    LabelVolume vol = empty_volume(8);
    vol.data[vol.grid.index(2, 3, 4)] = 7;
    const PointSet ps = extract_centroids(vol);
    REQUIRE(ps.size() == 1);
    CHECK(ps.labels[0] == 7);
    CHECK((ps.points[0] - Eigen::Vector3d(2, 3, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centroid of a symmetric cube at 2 mm spacing") {
    LabelVolume vol = empty_volume(12, 2.0);
    for (int k = 4; k <= 6; ++k)
        for (int j = 4; j <= 6; ++j)
            for (int i = 4; i <= 6; ++i)
                vol.data[vol.grid.index(i, j, k)] = 5;
    const PointSet ps = extract_centroids(vol);
    REQUIRE(ps.size() == 1);
    CHECK((ps.points[0] - Eigen::Vector3d(10, 10, 10)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("asymmetric region matches the brute-force voxel list oracle") {
    LabelVolume vol = empty_volume(16, 1.5, Eigen::Vector3d(-3, 2, 7));
    std::vector<Eigen::Vector3i> voxels;
    // L-shaped blob.
    for (int i = 2; i <= 9; ++i)
        voxels.emplace_back(i, 3, 3);
    for (int j = 4; j <= 11; ++j)
        voxels.emplace_back(2, j, 3);
    for (const auto& v : voxels)
        vol.data[vol.grid.index(v[0], v[1], v[2])] = 9;

    const PointSet ps = extract_centroids(vol);
    REQUIRE(ps.size() == 1);

    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& v : voxels)
        sum += vol.grid.world_at(v[0], v[1], v[2]);
    const Eigen::Vector3d expected = sum / static_cast<double>(voxels.size());
    CHECK((ps.points[0] - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("background and excluded labels are dropped; empty volume errors") {
    LabelVolume vol = empty_volume(6);
    vol.data[vol.grid.index(1, 1, 1)] = 3;
    vol.data[vol.grid.index(2, 2, 2)] = 4;

    LabelSelection sel;
    sel.excluded.insert(3);
    const PointSet ps = extract_centroids(vol, sel);
    REQUIRE(ps.size() == 1);
    CHECK(ps.labels[0] == 4);

    sel.excluded.insert(4);
    CHECK_THROWS_AS((void)extract_centroids(vol, sel), empty_point_set);
    CHECK_THROWS_AS((void)extract_centroids(empty_volume(4)), empty_point_set);
}

TEST_CASE("centroids are equivariant under a change of the header affine") {
    SynthSpec spec;
    spec.seed = 3;
    spec.n_regions = 9;
    spec.dims = {24, 24, 24};
    const LabelVolume vol = generate(spec).reference;
    const PointSet base = extract_centroids(vol);

    const AffineTransform a = random_affine(12, 0.8, 0.6, 1.7, 0.2, 15.0);
    LabelVolume warped_header = vol;
    warped_header.grid = make_grid(vol.grid.dims, compose(a, vol.grid.voxel_to_world));
    const PointSet moved = extract_centroids(warped_header);

    REQUIRE(moved.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK((moved.points[i] - a.apply(base.points[i])).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("merge-then-extract equals voxel-count-weighted average of centroids") {
    SynthSpec spec;
    spec.seed = 8;
    spec.n_regions = 10;
    spec.dims = {20, 20, 20};
    const LabelVolume vol = generate(spec).reference;

    LabelSelection merge;
    merge.merge_map[2] = 1;
    merge.merge_map[3] = 1;
    const PointSet merged = extract_centroids(vol, merge);

    const PointSet plain = extract_centroids(vol);
    std::map<int, std::int64_t> counts;
    for (std::int32_t l : vol.data)
        ++counts[l];

    Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
    std::int64_t total = 0;
    for (int label : {1, 2, 3}) {
        const std::size_t idx = static_cast<std::size_t>(
            std::find(plain.labels.begin(), plain.labels.end(), label) - plain.labels.begin());
        weighted += static_cast<double>(counts[label]) * Eigen::Vector3d(plain.points[idx]);
        total += counts[label];
    }
    weighted /= static_cast<double>(total);

    const std::size_t m1 = static_cast<std::size_t>(
        std::find(merged.labels.begin(), merged.labels.end(), 1) - merged.labels.begin());
    CHECK((merged.points[m1] - weighted).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(merged.size() == plain.size() - 2);
}

TEST_CASE("extraction is independent of the thread count") {
    SynthSpec spec;
    spec.seed = 5;
    spec.n_regions = 12;
    spec.dims = {32, 32, 32};
    const LabelVolume vol = generate(spec).reference;
    const PointSet a = extract_centroids(vol, {}, 1);
    const PointSet b = extract_centroids(vol, {}, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.labels[i] == b.labels[i]);
        CHECK((a.points[i] - b.points[i]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("pairing restricts to common labels in sorted order") {
    std::uint64_t s = 19;
    const auto pts = oracle::random_points(s, 6, 3, 30.0);
    const PointSet ref = make_point_set({1, 2, 5, 8, 10, 12}, pts);
    const PointSet mov = make_point_set({1, 2, 5, 8, 12, 20},
                                        oracle::random_points(s, 6, 3, 30.0));

    const auto [r, m] = pair_point_sets(ref, mov);
    CHECK(r.labels == std::vector<int>{1, 2, 5, 8, 12});
    CHECK(m.labels == r.labels);

    // Dictionary-join oracle: label -> point maps intersected by key.
    std::map<int, Eigen::VectorXd> dict_ref, dict_mov;
    for (std::size_t i = 0; i < ref.size(); ++i)
        dict_ref[ref.labels[i]] = ref.points[i];
    for (std::size_t i = 0; i < mov.size(); ++i)
        dict_mov[mov.labels[i]] = mov.points[i];
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK((r.points[i] - dict_ref.at(r.labels[i])).cwiseAbs().maxCoeff() == 0.0);
        CHECK((m.points[i] - dict_mov.at(m.labels[i])).cwiseAbs().maxCoeff() == 0.0);
    }

    // Idempotent, and symmetric in label content.
    const auto [r2, m2] = pair_point_sets(r, m);
    CHECK(r2.labels == r.labels);
    const auto [ms, rs] = pair_point_sets(mov, ref);
    CHECK(ms.labels == r.labels);
    for (std::size_t i = 0; i < rs.size(); ++i)
        CHECK((rs.points[i] - r.points[i]).cwiseAbs().maxCoeff() == 0.0);

    // Identical sets come back unchanged.
    const auto [r3, m3] = pair_point_sets(ref, ref);
    CHECK(r3.labels == ref.labels);

    const PointSet tiny = make_point_set({1, 2, 3}, oracle::random_points(s, 3, 3, 5.0));
    CHECK_THROWS_AS((void)pair_point_sets(tiny, tiny), insufficient_points);
}

TEST_CASE("label selection config parsing") {
    const LabelSelection sel = parse_label_selection(
        "# DKT exclusions\n2\n41\n\nmerge 1003 1000  # left cortex\nmerge 2003 1000\n77 # wm hypo\n");
    CHECK(sel.excluded == std::set<int>{2, 41, 77});
    CHECK(sel.merge_map.at(1003) == 1000);
    CHECK(sel.merge_map.at(2003) == 1000);

    CHECK_THROWS_AS((void)parse_label_selection("5\nmerge 5 9\n"), data_error);
    CHECK_THROWS_AS((void)parse_label_selection("bogus line\n"), data_error);
}
