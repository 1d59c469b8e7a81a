#pragma once

#include <vector>

#include "quatlag/quatmath.hpp"
#include "quatlag/rigid_dynamics.hpp"

namespace quatlag {

/// Desired state sample handed to the controllers.
struct DesiredPoint {
    UnitQuaternion qd;
    Vec4 qd_dot = Vec4::Zero();
    Vec4 qd_ddot = Vec4::Zero();
    Vec3 omega_d = Vec3::Zero();
    Vec3 omega_d_dot = Vec3::Zero();
};

/// Reference motion. constant_omega holds omega_d fixed at omega_d0;
/// sinusoid uses omega_d(t) = amplitude * sin(frequency * t) * [1, 1, 1].
struct TrajectorySpec {
    enum class Kind { constant_omega, sinusoid };

    Kind kind = Kind::constant_omega;
    UnitQuaternion qd0;
    Vec3 omega_d0 = Vec3::Zero();
    double amplitude = 0.1;
    double frequency = 0.62831853071795865; // rad/s

    Vec3 omega_d(double t) const;
    Vec3 omega_d_dot(double t) const;
    Vec3 omega_d_ddot(double t) const;
};

/// Generates qd(t) by RK4 integration of qd_dot = (1/2) J(qd) omega_d on an
/// internal grid (renormalized at each node), with analytic derivatives on
/// top of the integrated attitude. Queries may come in any order; the grid
/// cache grows lazily. Not safe for concurrent use from multiple threads.
class DesiredTrajectory {
public:
    explicit DesiredTrajectory(const TrajectorySpec& spec, double dt_internal = 1e-3);

    const TrajectorySpec& spec() const { return spec_; }

    DesiredPoint at(double t) const;

    /// Analytic third derivative of qd; available for both built-in kinds.
    Vec4 third_derivative(double t) const;

private:
    Vec4 qd_raw(double t) const;

    TrajectorySpec spec_;
    double dt_internal_;
    mutable std::vector<Vec4> grid_; // qd at multiples of dt_internal_
};

/// One-shot convenience wrapper around DesiredTrajectory::at.
DesiredPoint gen_desired(const TrajectorySpec& spec, double t, double dt_internal = 1e-3);

/// Conservative analytic sup bounds for |qd_dot| and |qd_ddot|; feeds
/// estimate_bounds and the gain checkers.
TrajectorySummary summarize(const TrajectorySpec& spec);

} // namespace quatlag
