#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mvkit/motion.hpp"

namespace mvkit {

enum class SyntheticKind { Constant, SingleAxisSine, MultiJointSine, RandomWalkSlerp };

const char* to_string(SyntheticKind k);
SyntheticKind synthetic_kind_from_string(std::string_view s);

struct SyntheticParams {
    int frames = 90;
    double fps = 30.0;
    int joints = 24;
    double amplitude = 0.3;  // radians
    double frequency = 1.0;  // Hz
    int axis = 2;            // rotation axis for single_axis_sine
    int joint = 3;           // driven joint for single_axis_sine
    double step_rad = 0.05;  // per-frame walk size for random_walk_slerp
    bool with_betas = false;
    bool with_translation = false;

    void validate() const;
};

// Deterministic test corpora.
//   constant:         one seeded random pose repeated every frame.
//   single_axis_sine: one joint follows angle(t) = amplitude *
//                     sin(2*pi*frequency*t/fps) about a fixed axis; all
//                     other joints identity. Closed-form derivatives.
//   multi_joint_sine: every non-root joint oscillates about a per-joint axis
//                     with seeded phases and detuned frequencies.
//   random_walk_slerp: each joint composes a small seeded random rotation
//                     per frame.
// with_betas adds one seeded shape vector on all frames; with_translation
// adds a smooth sinusoidal root path.
MotionSequence generate_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                  uint64_t seed);

}  // namespace mvkit
