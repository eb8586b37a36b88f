#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvkit/motion.hpp"

namespace mvkit {

// Kinematic tree of an SMPL-style body. Parents must be topologically
// ordered (parent index < child index) with exactly one root (-1); the mirror
// map is an involution pairing left/right joints, midline joints self-paired.
// The optional shape basis maps the 10 shape coefficients linearly to
// per-joint rest-offset deltas in meters.
struct Skeleton {
    int joint_count = 0;
    std::vector<int> parents;
    std::vector<Eigen::Vector3d> rest_offsets;               // meters, bone from parent
    std::vector<int> mirror_map;
    std::optional<std::vector<Eigen::Matrix<double, 3, kShapeCoeffCount>>> shape_basis;

    void validate() const;  // DataError naming the offending joint/field

    // Rest offset plus the linear shape delta (zero when betas are absent or
    // no basis is bundled).
    Eigen::Vector3d shaped_offset(int joint, const std::optional<ShapeCoeffs>& betas) const;
};

struct WeakPerspectiveCamera {
    double scale = 1.0;
    double t_x = 0.0;
    double t_y = 0.0;

    void validate() const;  // scale > 0
};

// Bundled 24-joint tree with SMPL parent topology, bilaterally symmetric
// synthetic rest offsets and a symmetric synthetic shape basis.
Skeleton default_skeleton();

// Text key-value skeleton file; see save_skeleton for the exact grammar.
// Unknown keys are rejected; every diagnostic names the offending field.
Skeleton load_skeleton(const std::string& path);
void save_skeleton(const std::string& path, const Skeleton& skel);

// World positions of all joints, meters. The root sits at root_translation
// (origin when absent); each child is placed by its parent's global rotation
// applied to the shaped rest offset, and global rotations compose down the
// tree.
JointPositions forward_kinematics(const Skeleton& skel, const PoseFrame& frame);

// FK over a whole sequence; fps copied from the input.
JointSequence fk_sequence(const Skeleton& skel, const MotionSequence& seq);

// (x, y) -> (s*x + t_x, s*y + t_y); depth discarded.
JointPositions2d project_weak_perspective(const JointPositions& joints,
                                          const WeakPerspectiveCamera& cam);

}  // namespace mvkit
