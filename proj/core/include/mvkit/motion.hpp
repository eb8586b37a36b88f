#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvkit {

inline constexpr int kSmplJointCount = 24;
inline constexpr int kShapeCoeffCount = 10;

using ShapeCoeffs = Eigen::Matrix<double, kShapeCoeffCount, 1>;
using JointPositions = Eigen::Matrix<double, Eigen::Dynamic, 3>;   // J x 3, meters
using JointPositions2d = Eigen::Matrix<double, Eigen::Dynamic, 2>; // J x 2

// One time step of body pose. Rotations are axis-angle (radians * axis), one
// per joint; index 0 is the root orientation in the world frame, every other
// joint is local to its parent.
struct PoseFrame {
    std::vector<Eigen::Vector3d> rotations;
    std::optional<ShapeCoeffs> betas;
    std::optional<Eigen::Vector3d> root_translation;

    int joint_count() const { return static_cast<int>(rotations.size()); }

    static PoseFrame identity(int joints = kSmplJointCount);
};

// Ordered pose frames with a frame rate and a provenance name. Frames must
// agree on joint count and on the presence of betas / root translation.
struct MotionSequence {
    std::vector<PoseFrame> frames;
    double fps = 30.0;
    std::string name;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int joint_count() const { return frames.empty() ? 0 : frames.front().joint_count(); }
    double duration_seconds() const { return frame_count() / fps; }
};

// Throws DataError naming the offending frame or field. Temporal operations
// pass min_frames = 2.
void validate_sequence(const MotionSequence& seq, int min_frames = 1);

// A sequence of 3D joint positions, the common currency of the metrics.
struct JointSequence {
    std::vector<JointPositions> frames;  // each J x 3, meters
    double fps = 30.0;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
};

bool bitwise_equal(const PoseFrame& a, const PoseFrame& b);
bool bitwise_equal(const MotionSequence& a, const MotionSequence& b);

}  // namespace mvkit
