#include "quatlag/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace quatlag {

namespace {

// RK4 step of qdot = (1/2) J(q) omega_d(t); q need not be unit mid-step.
Vec4 rk4_attitude_step(const TrajectorySpec& spec, const Vec4& q, double t, double h) {
    const auto f = [&spec](double tt, const Vec4& qq) -> Vec4 {
        return 0.5 * jmat(qq) * spec.omega_d(tt);
    };
    const Vec4 k1 = f(t, q);
    const Vec4 k2 = f(t + 0.5 * h, q + 0.5 * h * k1);
    const Vec4 k3 = f(t + 0.5 * h, q + 0.5 * h * k2);
    const Vec4 k4 = f(t + h, q + h * k3);
    return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

Vec3 TrajectorySpec::omega_d(double t) const {
    switch (kind) {
        case Kind::constant_omega:
            return omega_d0;
        case Kind::sinusoid:
            return amplitude * std::sin(frequency * t) * Vec3::Ones();
    }
    return Vec3::Zero();
}

Vec3 TrajectorySpec::omega_d_dot(double t) const {
    switch (kind) {
        case Kind::constant_omega:
            return Vec3::Zero();
        case Kind::sinusoid:
            return amplitude * frequency * std::cos(frequency * t) * Vec3::Ones();
    }
    return Vec3::Zero();
}

Vec3 TrajectorySpec::omega_d_ddot(double t) const {
    switch (kind) {
        case Kind::constant_omega:
            return Vec3::Zero();
        case Kind::sinusoid:
            return -amplitude * frequency * frequency * std::sin(frequency * t) * Vec3::Ones();
    }
    return Vec3::Zero();
}

DesiredTrajectory::DesiredTrajectory(const TrajectorySpec& spec, double dt_internal)
    : spec_(spec), dt_internal_(dt_internal) {
    if (!(dt_internal > 0.0)) {
        throw std::invalid_argument("DesiredTrajectory: dt_internal must be positive");
    }
    grid_.push_back(spec_.qd0.vec());
}

Vec4 DesiredTrajectory::qd_raw(double t) const {
    if (t < 0.0) {
        throw std::invalid_argument("DesiredTrajectory: negative query time");
    }
    const auto idx = static_cast<std::size_t>(t / dt_internal_ + 1e-9);
    while (grid_.size() <= idx) {
        const double tn = static_cast<double>(grid_.size() - 1) * dt_internal_;
        Vec4 next = rk4_attitude_step(spec_, grid_.back(), tn, dt_internal_);
        next /= next.norm(); // keep grid nodes on the sphere
        grid_.push_back(next);
    }
    const double frac = t - static_cast<double>(idx) * dt_internal_;
    if (frac < 1e-12) return grid_[idx];
    return rk4_attitude_step(spec_, grid_[idx], static_cast<double>(idx) * dt_internal_, frac);
}

DesiredPoint DesiredTrajectory::at(double t) const {
    DesiredPoint p;
    p.qd = normalize(qd_raw(t));
    p.omega_d = spec_.omega_d(t);
    p.omega_d_dot = spec_.omega_d_dot(t);
    // Derivatives are analytic on top of the integrated attitude, which keeps
    // qd^T qd_dot = 0 exactly.
    p.qd_dot = 0.5 * jmat(p.qd.vec()) * p.omega_d;
    p.qd_ddot = 0.5 * jmat(p.qd_dot) * p.omega_d + 0.5 * jmat(p.qd.vec()) * p.omega_d_dot;
    return p;
}

Vec4 DesiredTrajectory::third_derivative(double t) const {
    const DesiredPoint p = at(t);
    const Vec3 wdd = spec_.omega_d_ddot(t);
    return 0.5 * jmat(p.qd_ddot) * p.omega_d + jmat(p.qd_dot) * p.omega_d_dot +
           0.5 * jmat(p.qd.vec()) * wdd;
}

DesiredPoint gen_desired(const TrajectorySpec& spec, double t, double dt_internal) {
    return DesiredTrajectory(spec, dt_internal).at(t);
}

TrajectorySummary summarize(const TrajectorySpec& spec) {
    TrajectorySummary s;
    switch (spec.kind) {
        case TrajectorySpec::Kind::constant_omega: {
            const double w = spec.omega_d0.norm();
            s.sup_qd_dot = 0.5 * w;
            s.sup_qd_ddot = 0.25 * w * w;
            break;
        }
        case TrajectorySpec::Kind::sinusoid: {
            // |omega_d| <= a sqrt(3), |omega_d_dot| <= a f sqrt(3); the two
            // peaks are out of phase, so summing them is conservative.
            const double A = std::abs(spec.amplitude) * std::sqrt(3.0);
            const double Ad = A * std::abs(spec.frequency);
            s.sup_qd_dot = 0.5 * A;
            s.sup_qd_ddot = 0.25 * A * A + 0.5 * Ad;
            break;
        }
    }
    return s;
}

} // namespace quatlag
