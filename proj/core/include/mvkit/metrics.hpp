#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mvkit/motion.hpp"

namespace mvkit {

// Best-fit similarity transform p -> scale * rotation * p + translation.
struct SimilarityTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    double scale = 1.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct MetricsReport {
    double mpjpe_mm = 0.0;
    double pa_mpjpe_mm = 0.0;
    double accel_err_mm_s2 = 0.0;
    int frames = 0;
    int joints = 0;
    double fps = 0.0;
    // Per-frame means, filled on request. The acceleration array has T-2
    // entries (interior frames only).
    std::vector<double> per_frame_mpjpe_mm;
    std::vector<double> per_frame_pa_mpjpe_mm;
    std::vector<double> per_frame_accel_err_mm_s2;
};

// Mean per-joint position error after aligning each frame's root (joint 0),
// millimeters.
double mpjpe(const JointSequence& pred, const JointSequence& gt);

// Least-squares similarity alignment of pred onto gt (rotation, scale,
// translation; reflections excluded). Throws DataError when the point set is
// degenerate (fewer than 3 points or covariance rank < 2).
std::pair<JointPositions, SimilarityTransform> procrustes_align(const JointPositions& pred,
                                                                const JointPositions& gt);

// MPJPE after per-frame Procrustes alignment, millimeters.
double pa_mpjpe(const JointSequence& pred, const JointSequence& gt);

// Mean norm of the difference in per-joint acceleration (central second
// difference scaled by fps^2), mm/s^2. Requires T >= 3 and matching fps.
double accel_error(const JointSequence& pred, const JointSequence& gt);

// Training losses: plain sums of per-joint Euclidean norms, no averaging.
double loss_3d(const JointSequence& pred, const JointSequence& gt);
double loss_2d(const std::vector<JointPositions2d>& pred,
               const std::vector<JointPositions2d>& gt);

// Shape-and-pose parameter loss: ||beta - beta_hat|| from the first frame
// plus the per-frame L2 norm of the pose difference in the 6-DoF rotation
// encoding, summed over frames.
double loss_smpl(const MotionSequence& pred, const MotionSequence& gt);

// All three evaluation metrics in one pass. per_frame fills the per-frame
// arrays.
MetricsReport compute_metrics(const JointSequence& pred, const JointSequence& gt,
                              bool per_frame = false);

}  // namespace mvkit
