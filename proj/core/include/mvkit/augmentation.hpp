#pragma once

#include <cstdint>
#include <vector>

#include "mvkit/motion.hpp"
#include "mvkit/skeleton.hpp"

namespace mvkit {

struct AugmentConfig {
    std::vector<double> speed_factors;  // empty keeps the original timing
    bool enable_flip = false;
    int root_rotation_samples = 0;      // extra copies per sequence, 0 disables
    uint64_t rng_seed = 0;

    void validate() const;
};

// Uniform temporal resampling: output frame i samples the input at time
// min(i*factor, T-1), rotations by shortest-arc slerp per joint, translation
// and shape linearly. Output frame count is max(2, round(T/factor)) at
// unchanged fps; samples landing exactly on an input frame copy it bitwise.
MotionSequence resample(const MotionSequence& seq, double factor);

// Mirror across the sagittal plane: rotations permuted by the skeleton's
// mirror map and conjugated by diag(-1,1,1) (axis-angle (rx,ry,rz) ->
// (rx,-ry,-rz)), root translation x-negated. Exact involution.
MotionSequence flip_lr(const MotionSequence& seq, const Skeleton& skel);

// Left-multiplies one uniformly random rotation onto every frame's root
// orientation; all other parameters are untouched. Deterministic per seed.
MotionSequence random_root_rotation(const MotionSequence& seq, uint64_t rng_seed);

// Cartesian expansion: speed variants x optional flip x (1 + rotation
// samples), in deterministic order with per-variant seeds derived from
// cfg.rng_seed. An empty config returns the input list unchanged. The
// skeleton supplies the mirror map for flips.
std::vector<MotionSequence> augment_dataset(const std::vector<MotionSequence>& seqs,
                                            const AugmentConfig& cfg,
                                            const Skeleton& skel = default_skeleton());

}  // namespace mvkit
