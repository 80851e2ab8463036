#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polaffini/errors.hpp"

namespace polaffini {

// Scatter/covariance matrices are treated as singular when the ratio of
// smallest to largest singular value falls below this.
inline constexpr double kDegenerateSvRatio = 1e-10;

// An eigenvalue is considered to sit on the closed negative real half-line
// (no principal logarithm) when its real part is negative and its imaginary
// part is smaller than this in magnitude.
inline constexpr double kNegativeAxisTol = 1e-9;

/// Homogeneous affine transform x -> linear * x + translation, d in {2,3}.
struct AffineTransform {
    Eigen::MatrixXd linear;       // d x d, invertible
    Eigen::VectorXd translation;  // d, mm

    int dim() const { return static_cast<int>(translation.size()); }

    static AffineTransform identity(int d);
    // Builds from a (d+1)x(d+1) homogeneous matrix; the last row must be
    // (0,...,0,1) and the linear part invertible.
    static AffineTransform from_matrix(const Eigen::MatrixXd& homogeneous);

    Eigen::MatrixXd matrix() const;  // (d+1) x (d+1) homogeneous form

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        return linear * x + translation;
    }
    Eigen::Vector3d apply3(const Eigen::Vector3d& x) const {
        return linear * x + translation;
    }
};

/// Element of the affine Lie algebra: (d+1)x(d+1) matrix, last row zero.
struct LogAffine {
    Eigen::MatrixXd matrix;

    int dim() const { return static_cast<int>(matrix.rows()) - 1; }
    static LogAffine zero(int d);
};

/// Labeled world-space points. Labels are unique and sorted ascending, so
/// two sets covering the same regions are paired positionally.
struct PointSet {
    std::vector<int> labels;
    std::vector<Eigen::VectorXd> points;
    Eigen::VectorXd centroid;  // cached mean

    std::size_t size() const { return points.size(); }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
};

// Sorts by label, rejects duplicates and caches the centroid.
PointSet make_point_set(std::vector<int> labels, std::vector<Eigen::VectorXd> points);

// ---------------------------------------------------------------------------
// Closed-form point-set fits. The *_core variants pair points positionally
// and are what the per-neighborhood estimation uses; the PointSet variants
// first check that the labels agree.
// ---------------------------------------------------------------------------

AffineTransform fit_affine_core(const std::vector<Eigen::VectorXd>& x,
                                const std::vector<Eigen::VectorXd>& y);
AffineTransform fit_rigid_core(const std::vector<Eigen::VectorXd>& x,
                               const std::vector<Eigen::VectorXd>& y);
AffineTransform fit_translation_core(const std::vector<Eigen::VectorXd>& x,
                                     const std::vector<Eigen::VectorXd>& y);

AffineTransform fit_affine_lls(const PointSet& reference, const PointSet& moving);
AffineTransform fit_rigid(const PointSet& reference, const PointSet& moving);
AffineTransform fit_translation(const PointSet& reference, const PointSet& moving);

// ---------------------------------------------------------------------------
// Matrix logarithm / exponential of homogeneous affine matrices.
// ---------------------------------------------------------------------------

// Principal logarithm by inverse scaling and squaring: repeated matrix
// square roots until the argument is close to identity, a truncated log
// series, then scaling back. Throws log_undefined when an eigenvalue of the
// linear part lies on the closed negative real half-line within
// negative_axis_tol.
LogAffine matrix_log(const AffineTransform& a,
                     double negative_axis_tol = kNegativeAxisTol);

// Exponential by scaling and squaring with a truncated Taylor series.
AffineTransform matrix_exp(const LogAffine& m);

AffineTransform compose(const AffineTransform& a, const AffineTransform& b);
AffineTransform invert(const AffineTransform& a);

// ---------------------------------------------------------------------------
// Plain-text serialization: d+1 rows of d+1 numbers, 17 significant digits,
// so write -> read -> write reproduces the bytes.
// ---------------------------------------------------------------------------

std::string affine_to_text(const AffineTransform& a);
AffineTransform affine_from_text(const std::string& text);
void write_affine_text(const AffineTransform& a, const std::string& path);
AffineTransform read_affine_text(const std::string& path);

}  // namespace polaffini
