#include "mvkit/motion.hpp"

#include <cmath>
#include <cstring>

#include "mvkit/error.hpp"

namespace mvkit {

PoseFrame PoseFrame::identity(int joints) {
    PoseFrame f;
    f.rotations.assign(static_cast<std::size_t>(joints), Eigen::Vector3d::Zero());
    return f;
}

void validate_sequence(const MotionSequence& seq, int min_frames) {
    if (seq.frame_count() < min_frames) {
        throw DataError("sequence '" + seq.name + "' has " + std::to_string(seq.frame_count()) +
                        " frame(s), need at least " + std::to_string(min_frames));
    }
    if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
        throw DataError("sequence '" + seq.name + "' has non-positive fps");
    }
    if (seq.frames.empty()) return;
    const PoseFrame& first = seq.frames.front();
    for (int t = 0; t < seq.frame_count(); ++t) {
        const PoseFrame& f = seq.frames[static_cast<std::size_t>(t)];
        if (f.joint_count() != first.joint_count()) {
            throw DataError("sequence '" + seq.name + "': frame " + std::to_string(t) +
                            " joint count differs from frame 0");
        }
        if (f.betas.has_value() != first.betas.has_value()) {
            throw DataError("sequence '" + seq.name + "': frame " + std::to_string(t) +
                            " betas presence differs from frame 0");
        }
        if (f.root_translation.has_value() != first.root_translation.has_value()) {
            throw DataError("sequence '" + seq.name + "': frame " + std::to_string(t) +
                            " root translation presence differs from frame 0");
        }
        for (const auto& r : f.rotations) {
            if (!r.allFinite()) {
                throw DataError("sequence '" + seq.name + "': frame " + std::to_string(t) +
                                " contains a non-finite rotation");
            }
        }
    }
}

bool bitwise_equal(const PoseFrame& a, const PoseFrame& b) {
    if (a.joint_count() != b.joint_count()) return false;
    for (std::size_t j = 0; j < a.rotations.size(); ++j) {
        if (std::memcmp(a.rotations[j].data(), b.rotations[j].data(), 3 * sizeof(double)) != 0) {
            return false;
        }
    }
    if (a.betas.has_value() != b.betas.has_value()) return false;
    if (a.betas &&
        std::memcmp(a.betas->data(), b.betas->data(), kShapeCoeffCount * sizeof(double)) != 0) {
        return false;
    }
    if (a.root_translation.has_value() != b.root_translation.has_value()) return false;
    if (a.root_translation && std::memcmp(a.root_translation->data(), b.root_translation->data(),
                                          3 * sizeof(double)) != 0) {
        return false;
    }
    return true;
}

bool bitwise_equal(const MotionSequence& a, const MotionSequence& b) {
    if (a.frame_count() != b.frame_count()) return false;
    if (std::memcmp(&a.fps, &b.fps, sizeof(double)) != 0) return false;
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        if (!bitwise_equal(a.frames[t], b.frames[t])) return false;
    }
    return true;
}

}  // namespace mvkit
