// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Plain truncated Taylor exponential, no scaling tricks: adequate for the
// small generators it gets in tests.
inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& m, int terms = 30) {
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::MatrixXd sum = term;
    for (int j = 1; j <= terms; ++j) {
        term = term * m / static_cast<double>(j);
        sum += term;
    }
    return sum;
}

// Taylor exponential with scaling and squaring, for arguments of any size.
inline Eigen::MatrixXd scaled_taylor_expm(const Eigen::MatrixXd& m) {
    int s = 0;
    double norm = m.cwiseAbs().maxCoeff();
    while (norm > 0.2) {
        norm *= 0.5;
        ++s;
    }
    Eigen::MatrixXd e = taylor_expm(m * std::ldexp(1.0, -s), 40);
    for (int k = 0; k < s; ++k)
        e = e * e;
    return e;
}

// Circumsphere of a tetrahedron by solving the linear system
// 2 (v_i - v_0) . c = |v_i|^2 - |v_0|^2 with Gaussian elimination.
struct Circumsphere {
    Eigen::Vector3d center;
    double radius;
};

inline Circumsphere circumsphere(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
    Eigen::Matrix3d m;
    Eigen::Vector3d rhs;
    const Eigen::Vector3d others[3] = {b, c, d};
    for (int r = 0; r < 3; ++r) {
        m.row(r) = 2.0 * (others[r] - a).transpose();
        rhs[r] = others[r].squaredNorm() - a.squaredNorm();
    }
    Circumsphere s;
    s.center = m.fullPivLu().solve(rhs);
    s.radius = (a - s.center).norm();
    return s;
}

// Fixed-step classic Runge-Kutta for dx/dt = V(x), t in [0, 1].
inline Eigen::Vector3d rk4_flow(const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& velocity,
                                const Eigen::Vector3d& x0, int steps = 256) {
    Eigen::Vector3d x = x0;
    const double h = 1.0 / steps;
    for (int s = 0; s < steps; ++s) {
        const Eigen::Vector3d k1 = velocity(x);
        const Eigen::Vector3d k2 = velocity(x + 0.5 * h * k1);
        const Eigen::Vector3d k3 = velocity(x + 0.5 * h * k2);
        const Eigen::Vector3d k4 = velocity(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

// Deterministic generator, independent of the library's.
inline std::uint64_t next_state(std::uint64_t& s) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
}

inline double urand(std::uint64_t& s, double lo, double hi) {
    const double u = static_cast<double>(next_state(s) >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

// Random rotation via normalized quaternion sampling.
inline Eigen::Matrix3d random_rotation(std::uint64_t& s, double max_angle) {
    Eigen::Vector3d axis(urand(s, -1, 1), urand(s, -1, 1), urand(s, -1, 1));
    if (axis.norm() < 1e-9)
        axis = Eigen::Vector3d::UnitX();
    axis.normalize();
    return Eigen::AngleAxisd(urand(s, -max_angle, max_angle), axis).toRotationMatrix();
}

inline std::vector<Eigen::VectorXd> random_points(std::uint64_t& s, int n, int d,
                                                  double half_extent) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p(d);
        for (int k = 0; k < d; ++k)
            p[k] = urand(s, -half_extent, half_extent);
        pts.push_back(p);
    }
    return pts;
}

}  // namespace oracle
