#pragma once

#include <string>

#include "mvkit/augmentation.hpp"
#include "mvkit/smoothing.hpp"
#include "mvkit/vae.hpp"

namespace mvkit {

// Toolkit-wide settings document: INI-style sections with typed keys and
// defaults; unknown sections or keys are rejected.
struct RunConfig {
    AugmentConfig augment;
    VaeConfig vae;
    WindowSpec window;
    double smooth_ratio = 0.5;
    StitchPolicy stitch_policy = StitchPolicy::TakeFirst;
    bool evaluate_per_frame = false;

    void validate() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace mvkit
