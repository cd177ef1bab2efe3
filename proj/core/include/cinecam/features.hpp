#pragma once

#include <Eigen/Dense>

#include "cinecam/trajectory.hpp"

namespace cinecam {

inline constexpr int kTrajFeatureDim = 17;

/// Summary statistics of one trajectory, all in the subject-local frame:
///   [0..2]  translation-velocity mean (m/s, per axis)
///   [3..5]  translation-velocity std (population)
///   [6..7]  speed mean / std
///   [8..9]  angular-speed mean / std (rad/s, quaternion geodesic * fps)
///   [10..12] fov mean / std / range (radians)
///   [13..14] camera-to-subject-mid distance mean / std (m)
///   [15]    path length (m)
///   [16]    net displacement norm (m)
struct TrajFeatures {
    Eigen::VectorXd values = Eigen::VectorXd::Zero(kTrajFeatureDim);
};

/// Deterministic; invariant to rigid world placement of the
/// (trajectory, subject) pair since everything is measured subject-locally.
TrajFeatures trajectory_features(const Trajectory& traj, const SubjectProxy& subject);

}  // namespace cinecam
