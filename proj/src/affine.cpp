#include "polaffini/affine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace polaffini {

AffineTransform AffineTransform::identity(int d) {
    AffineTransform a;
    a.linear = Eigen::MatrixXd::Identity(d, d);
    a.translation = Eigen::VectorXd::Zero(d);
    return a;
}

AffineTransform AffineTransform::from_matrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 3)
        throw data_error("homogeneous matrix must be square, at least 3x3");
    const int d = static_cast<int>(m.rows()) - 1;
    for (int j = 0; j < d; ++j)
        if (std::abs(m(d, j)) > 1e-12)
            throw data_error("homogeneous matrix last row must be (0,...,0,1)");
    if (std::abs(m(d, d) - 1.0) > 1e-12)
        throw data_error("homogeneous matrix last row must be (0,...,0,1)");
    AffineTransform a;
    a.linear = m.topLeftCorner(d, d);
    a.translation = m.topRightCorner(d, 1);
    if (std::abs(a.linear.determinant()) <= 1e-12)
        throw singular_transform("affine linear part is singular");
    return a;
}

Eigen::MatrixXd AffineTransform::matrix() const {
    const int d = dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d + 1, d + 1);
    m.topLeftCorner(d, d) = linear;
    m.topRightCorner(d, 1) = translation;
    return m;
}

LogAffine LogAffine::zero(int d) {
    return LogAffine{Eigen::MatrixXd::Zero(d + 1, d + 1)};
}

PointSet make_point_set(std::vector<int> labels, std::vector<Eigen::VectorXd> points) {
    if (labels.size() != points.size())
        throw data_error("point set needs one label per point");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    PointSet ps;
    ps.labels.reserve(labels.size());
    ps.points.reserve(points.size());
    for (std::size_t k : order) {
        if (!ps.labels.empty() && ps.labels.back() == labels[k])
            throw data_error("duplicate label " + std::to_string(labels[k]) + " in point set");
        ps.labels.push_back(labels[k]);
        ps.points.push_back(std::move(points[k]));
    }
    if (!ps.points.empty()) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(ps.points[0].size());
        for (const auto& p : ps.points)
            sum += p;
        ps.centroid = sum / static_cast<double>(ps.points.size());
    }
    return ps;
}

namespace {

void check_paired(const PointSet& reference, const PointSet& moving) {
    if (reference.labels != moving.labels)
        throw pairing_mismatch("point sets carry different labels; pair them first");
    if (!reference.points.empty() && reference.dim() != moving.dim())
        throw pairing_mismatch("point sets have different dimensions");
}

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& pts) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(pts[0].size());
    for (const auto& p : pts)
        m += p;
    return m / static_cast<double>(pts.size());
}

}  // namespace

AffineTransform fit_affine_core(const std::vector<Eigen::VectorXd>& x,
                                const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size() || x.empty())
        throw pairing_mismatch("affine fit needs two non-empty point lists of equal size");
    const int d = static_cast<int>(x[0].size());
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(d) + 1)
        throw degenerate_configuration("affine fit needs at least d+1 point pairs");

    const Eigen::VectorXd mx = mean_of(x);
    const Eigen::VectorXd my = mean_of(y);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);  // sum x'x'^T
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(d, d);    // sum y'x'^T
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd xc = x[i] - mx;
        const Eigen::VectorXd yc = y[i] - my;
        scatter += xc * xc.transpose();
        cross += yc * xc.transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scatter, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(d - 1) / sv(0) < kDegenerateSvRatio)
        throw degenerate_configuration("reference points are affinely dependent (singular scatter matrix)");

    AffineTransform a;
    a.linear = cross * svd.solve(Eigen::MatrixXd::Identity(d, d));
    a.translation = my - a.linear * mx;
    if (std::abs(a.linear.determinant()) <= 1e-12)
        throw degenerate_configuration("fitted affine has a singular linear part");
    return a;
}

AffineTransform fit_rigid_core(const std::vector<Eigen::VectorXd>& x,
                               const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size() || x.empty())
        throw pairing_mismatch("rigid fit needs two non-empty point lists of equal size");
    const int d = static_cast<int>(x[0].size());
    const std::size_t n = x.size();
    if (n < 2)
        throw degenerate_configuration("rigid fit needs at least 2 point pairs");

    const Eigen::VectorXd mx = mean_of(x);
    const Eigen::VectorXd my = mean_of(y);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);  // sum x'y'^T
    for (std::size_t i = 0; i < n; ++i)
        cov += (x[i] - mx) * (y[i] - my).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // The optimal rotation is not unique when the cross-covariance has rank
    // below d-1 (any spin around the remaining axis fits equally well).
    if (sv(0) <= 0.0 || sv(d - 2) / sv(0) < kDegenerateSvRatio)
        throw degenerate_configuration("cross-covariance is rank-deficient; rotation is not unique");

    Eigen::MatrixXd r = svd.matrixV() * svd.matrixU().transpose();
    if (r.determinant() < 0.0) {
        Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(d, d);
        flip(d - 1, d - 1) = -1.0;
        r = svd.matrixV() * flip * svd.matrixU().transpose();
    }

    AffineTransform a;
    a.linear = r;
    a.translation = my - r * mx;
    return a;
}

AffineTransform fit_translation_core(const std::vector<Eigen::VectorXd>& x,
                                     const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size() || x.empty())
        throw pairing_mismatch("translation fit needs two non-empty point lists of equal size");
    const int d = static_cast<int>(x[0].size());
    AffineTransform a = AffineTransform::identity(d);
    a.translation = mean_of(y) - mean_of(x);
    return a;
}

AffineTransform fit_affine_lls(const PointSet& reference, const PointSet& moving) {
    check_paired(reference, moving);
    return fit_affine_core(reference.points, moving.points);
}

AffineTransform fit_rigid(const PointSet& reference, const PointSet& moving) {
    check_paired(reference, moving);
    return fit_rigid_core(reference.points, moving.points);
}

AffineTransform fit_translation(const PointSet& reference, const PointSet& moving) {
    check_paired(reference, moving);
    return fit_translation_core(reference.points, moving.points);
}

// ---------------------------------------------------------------------------
// Matrix logarithm / exponential
// ---------------------------------------------------------------------------

namespace {

// Square root of a homogeneous matrix via the product form of the
// Denman-Beavers iteration: M -> I, Y -> sqrt(A), one inverse per step.
Eigen::MatrixXd sqrtm_homogeneous(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd m = a;
    Eigen::MatrixXd y = a;
    for (int it = 0; it < 60; ++it) {
        if ((m - id).cwiseAbs().maxCoeff() < 1e-15)
            break;
        const Eigen::MatrixXd minv = m.partialPivLu().solve(id);
        y = 0.5 * y * (id + minv);
        m = 0.5 * (id + 0.5 * (m + minv));
    }
    return y;
}

}  // namespace

LogAffine matrix_log(const AffineTransform& a, double negative_axis_tol) {
    const int d = a.dim();

    // Existence: the linear part must have no eigenvalue on the closed
    // negative real half-line (e.g. a rotation by pi).
    const Eigen::VectorXcd eig = a.linear.eigenvalues();
    for (int i = 0; i < eig.size(); ++i) {
        if (std::abs(eig(i)) < 1e-12)
            throw log_undefined("linear part is singular; no logarithm");
        if (eig(i).real() < 0.0 && std::abs(eig(i).imag()) <= negative_axis_tol)
            throw log_undefined(
                "eigenvalue on the closed negative real half-line; principal logarithm undefined");
    }

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d + 1, d + 1);
    Eigen::MatrixXd m = a.matrix();

    // Inverse scaling: take square roots until close to identity.
    int sqrt_count = 0;
    while ((m - id).cwiseAbs().maxCoeff() >= 0.25 && sqrt_count < 60) {
        m = sqrtm_homogeneous(m);
        ++sqrt_count;
    }

    // Truncated Mercator series on X = M - I.
    const Eigen::MatrixXd x = m - id;
    Eigen::MatrixXd term = x;
    Eigen::MatrixXd sum = x;
    for (int j = 2; j <= 64; ++j) {
        term = term * x;
        const Eigen::MatrixXd contrib = term / static_cast<double>(j);
        sum += (j % 2 == 0) ? -contrib : contrib;
        if (contrib.cwiseAbs().maxCoeff() < 1e-18)
            break;
    }

    LogAffine out;
    out.matrix = std::ldexp(1.0, sqrt_count) * sum;
    out.matrix.row(d).setZero();  // exactly in the affine Lie algebra
    return out;
}

AffineTransform matrix_exp(const LogAffine& m) {
    const int d = m.dim();
    for (int j = 0; j <= d; ++j)
        if (m.matrix(d, j) != 0.0)
            throw data_error("log-affine matrix must have a zero last row");

    double norm = m.matrix.cwiseAbs().maxCoeff();
    int squarings = 0;
    while (norm > 0.25 && squarings < 60) {
        norm *= 0.5;
        ++squarings;
    }

    const Eigen::MatrixXd scaled = m.matrix * std::ldexp(1.0, -squarings);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d + 1, d + 1);
    Eigen::MatrixXd sum = term;
    for (int j = 1; j <= 40; ++j) {
        term = term * scaled / static_cast<double>(j);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        sum = sum * sum;

    return AffineTransform::from_matrix(sum);
}

AffineTransform compose(const AffineTransform& a, const AffineTransform& b) {
    if (a.dim() != b.dim())
        throw data_error("cannot compose affines of different dimensions");
    AffineTransform c;
    c.linear = a.linear * b.linear;
    c.translation = a.linear * b.translation + a.translation;
    return c;
}

AffineTransform invert(const AffineTransform& a) {
    if (std::abs(a.linear.determinant()) <= 1e-12)
        throw singular_transform("affine is not invertible");
    AffineTransform inv;
    inv.linear = a.linear.inverse();
    inv.translation = -(inv.linear * a.translation);
    return inv;
}

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------

std::string affine_to_text(const AffineTransform& a) {
    const Eigen::MatrixXd m = a.matrix();
    std::string out;
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out += buf;
            out += (j + 1 == m.cols()) ? '\n' : ' ';
        }
    }
    return out;
}

AffineTransform affine_from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> values;
    double v;
    while (in >> v)
        values.push_back(v);
    int side = 0;
    while (static_cast<std::size_t>(side) * side < values.size())
        ++side;
    if (values.empty() || static_cast<std::size_t>(side) * side != values.size() || side < 3)
        throw data_error("affine text must hold (d+1)^2 numbers, d in {2,3}");
    Eigen::MatrixXd m(side, side);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            m(i, j) = values[static_cast<std::size_t>(i) * side + j];
    return AffineTransform::from_matrix(m);
}

void write_affine_text(const AffineTransform& a, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot open " + path + " for writing");
    out << affine_to_text(a);
    if (!out)
        throw data_error("failed writing " + path);
}

AffineTransform read_affine_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return affine_from_text(ss.str());
}

}  // namespace polaffini
