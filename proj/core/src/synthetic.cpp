#include "mvkit/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "mvkit/error.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

const char* to_string(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::Constant: return "constant";
        case SyntheticKind::SingleAxisSine: return "single_axis_sine";
        case SyntheticKind::MultiJointSine: return "multi_joint_sine";
        case SyntheticKind::RandomWalkSlerp: return "random_walk_slerp";
    }
    return "?";
}

SyntheticKind synthetic_kind_from_string(std::string_view s) {
    if (s == "constant") return SyntheticKind::Constant;
    if (s == "single_axis_sine") return SyntheticKind::SingleAxisSine;
    if (s == "multi_joint_sine") return SyntheticKind::MultiJointSine;
    if (s == "random_walk_slerp") return SyntheticKind::RandomWalkSlerp;
    throw DataError("unknown synthetic kind: " + std::string(s));
}

void SyntheticParams::validate() const {
    if (frames < 2) throw DataError("synthetic frames must be >= 2, got " + std::to_string(frames));
    if (!(fps > 0.0) || !std::isfinite(fps)) throw DataError("synthetic fps must be positive");
    if (joints < 1) throw DataError("synthetic joints must be >= 1, got " + std::to_string(joints));
    if (!std::isfinite(amplitude) || amplitude < 0.0)
        throw DataError("synthetic amplitude must be >= 0");
    if (!std::isfinite(frequency) || frequency < 0.0)
        throw DataError("synthetic frequency must be >= 0");
    if (axis < 0 || axis > 2) throw DataError("synthetic axis must be 0, 1 or 2");
    if (joint < 0 || joint >= joints)
        throw DataError("synthetic joint " + std::to_string(joint) + " is out of range");
    if (!(step_rad >= 0.0) || !std::isfinite(step_rad))
        throw DataError("synthetic step_rad must be >= 0");
}

namespace {

// A mild random pose: every joint rotated by a bounded random axis-angle.
PoseFrame random_pose(int joints, Rng& rng, double max_angle) {
    PoseFrame f;
    f.rotations.reserve(static_cast<size_t>(joints));
    for (int j = 0; j < joints; ++j) {
        Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
        const double n = axis.norm();
        if (n < 1e-12) axis = Eigen::Vector3d::UnitX();
        else axis /= n;
        f.rotations.push_back(axis * rng.uniform(0.0, max_angle));
    }
    return f;
}

}  // namespace

MotionSequence generate_synthetic(SyntheticKind kind, const SyntheticParams& p,
                                  uint64_t seed) {
    p.validate();
    Rng rng(seed);
    constexpr double tau = 2.0 * std::numbers::pi;

    MotionSequence seq;
    seq.fps = p.fps;
    seq.name = std::string(to_string(kind)) + "_" + std::to_string(seed);
    seq.frames.reserve(static_cast<size_t>(p.frames));

    switch (kind) {
        case SyntheticKind::Constant: {
            const PoseFrame pose = random_pose(p.joints, rng, p.amplitude);
            for (int t = 0; t < p.frames; ++t) seq.frames.push_back(pose);
            break;
        }
        case SyntheticKind::SingleAxisSine: {
            for (int t = 0; t < p.frames; ++t) {
                PoseFrame f = PoseFrame::identity(p.joints);
                const double angle =
                    p.amplitude * std::sin(tau * p.frequency * static_cast<double>(t) / p.fps);
                f.rotations[static_cast<size_t>(p.joint)](p.axis) = angle;
                seq.frames.push_back(std::move(f));
            }
            break;
        }
        case SyntheticKind::MultiJointSine: {
            std::vector<double> phase(static_cast<size_t>(p.joints));
            std::vector<double> detune(static_cast<size_t>(p.joints));
            std::vector<Eigen::Vector3d> axes(static_cast<size_t>(p.joints));
            for (int j = 0; j < p.joints; ++j) {
                phase[static_cast<size_t>(j)] = rng.uniform(0.0, tau);
                detune[static_cast<size_t>(j)] = rng.uniform(0.5, 1.5);
                Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
                const double n = a.norm();
                axes[static_cast<size_t>(j)] =
                    n < 1e-12 ? Eigen::Vector3d(Eigen::Vector3d::UnitZ()) : Eigen::Vector3d(a / n);
            }
            for (int t = 0; t < p.frames; ++t) {
                PoseFrame f = PoseFrame::identity(p.joints);
                for (int j = 1; j < p.joints; ++j) {
                    const double angle =
                        p.amplitude *
                        std::sin(tau * p.frequency * detune[static_cast<size_t>(j)] *
                                     static_cast<double>(t) / p.fps +
                                 phase[static_cast<size_t>(j)]);
                    f.rotations[static_cast<size_t>(j)] = axes[static_cast<size_t>(j)] * angle;
                }
                seq.frames.push_back(std::move(f));
            }
            break;
        }
        case SyntheticKind::RandomWalkSlerp: {
            std::vector<Eigen::Vector4d> state(static_cast<size_t>(p.joints),
                                               Eigen::Vector4d(1.0, 0.0, 0.0, 0.0));
            for (int t = 0; t < p.frames; ++t) {
                PoseFrame f;
                f.rotations.reserve(static_cast<size_t>(p.joints));
                for (int j = 0; j < p.joints; ++j) {
                    if (t > 0) {
                        Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
                        const double n = axis.norm();
                        if (n > 1e-12) {
                            const Eigen::Vector4d step = quaternion_from_axis_angle(
                                (axis / n) * rng.uniform(0.0, p.step_rad));
                            state[static_cast<size_t>(j)] = canonical_quaternion(
                                quaternion_multiply(state[static_cast<size_t>(j)], step));
                        }
                    }
                    f.rotations.push_back(
                        axis_angle_from_quaternion(state[static_cast<size_t>(j)]));
                }
                seq.frames.push_back(std::move(f));
            }
            break;
        }
    }

    if (p.with_betas) {
        ShapeCoeffs betas;
        for (int i = 0; i < kShapeCoeffCount; ++i) betas(i) = rng.uniform(-1.0, 1.0);
        for (auto& f : seq.frames) f.betas = betas;
    }
    if (p.with_translation) {
        for (int t = 0; t < p.frames; ++t) {
            const double s = static_cast<double>(t) / p.fps;
            seq.frames[static_cast<size_t>(t)].root_translation =
                Eigen::Vector3d(0.5 * std::sin(tau * 0.2 * s), 0.02 * std::sin(tau * 0.5 * s),
                                0.3 * std::cos(tau * 0.15 * s));
        }
    }
    return seq;
}

}  // namespace mvkit
