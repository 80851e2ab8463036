#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <polaffini/evaluation.hpp>
#include <polaffini/features.hpp>
#include <polaffini/synth.hpp>

#include <map>

using namespace polaffini;

TEST_CASE("identity warp duplicates the reference") {
    SynthSpec spec;
    spec.seed = 1;
    spec.n_regions = 8;
    spec.dims = {24, 24, 24};
    const SynthResult r = generate(spec);
    CHECK(r.moving.data == r.reference.data);
}

TEST_CASE("pure translation moves every centroid by the offset") {
    SynthSpec spec;
    spec.seed = 2;
    spec.n_regions = 10;
    spec.dims = {40, 40, 40};
    spec.spacing_mm = 1.0;
    spec.warp = WarpKind::affine;
    spec.affine = AffineTransform::identity(3);
    spec.affine.translation = Eigen::Vector3d(5, 0, 0);
    const SynthResult r = generate(spec);

    const PointSet ref = extract_centroids(r.reference);
    const PointSet mov = extract_centroids(r.moving);
    REQUIRE(ref.labels == mov.labels);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const Eigen::VectorXd diff = mov.points[i] - ref.points[i];
        CHECK((diff - Eigen::Vector3d(5, 0, 0)).cwiseAbs().maxCoeff() <= 0.5);
    }
}

TEST_CASE("polyaffine ground-truth warps are topology preserving") {
    SynthSpec spec;
    spec.seed = 3;
    spec.n_regions = 10;
    spec.dims = {48, 48, 48};
    spec.warp = WarpKind::polyaffine;
    spec.anchors = 8;
    spec.magnitude = 0.2;
    const SynthResult r = generate(spec);
    const JacobianReport j = jacobian_report(r.gt_full_displacement);
    CHECK(j.negative_count == 0);
    CHECK(j.min_det > 0.0);

    // The warp actually moved things.
    CHECK(r.moving.data != r.reference.data);
}

TEST_CASE("generation is deterministic in the seed") {
    SynthSpec spec;
    spec.seed = 9;
    spec.n_regions = 9;
    spec.dims = {20, 20, 20};
    spec.warp = WarpKind::polyaffine;
    spec.anchors = 5;
    const SynthResult a = generate(spec, 1);
    const SynthResult b = generate(spec, 3);
    CHECK(a.reference.data == b.reference.data);
    CHECK(a.moving.data == b.moving.data);
    CHECK(a.gt_svf.data == b.gt_svf.data);

    SynthSpec other = spec;
    other.seed = 10;
    CHECK(generate(other).reference.data != a.reference.data);
}

TEST_CASE("every generated label has at least 27 voxels") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthSpec spec;
        spec.seed = seed;
        spec.n_regions = 14;
        spec.dims = {32, 32, 32};
        const SynthResult r = generate(spec);
        std::map<int, std::int64_t> counts;
        for (std::int32_t l : r.reference.data)
            ++counts[l];
        for (int label = 1; label <= spec.n_regions; ++label)
            CHECK(counts[label] >= 27);
    }
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.n_regions = 4;
    CHECK_THROWS_AS((void)generate(spec), data_error);

    SynthSpec wild;
    wild.warp = WarpKind::polyaffine;
    wild.magnitude = 0.9;
    CHECK_THROWS_AS((void)generate(wild), data_error);
}
