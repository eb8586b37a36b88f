#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mvkit/motion.hpp"

namespace mvkit {

struct WindowSpec {
    int width = 90;
    int stride = 90;

    void validate() const;  // width >= 2, 1 <= stride <= width
};

struct WindowPlacement {
    int start = 0;    // first source frame covered by the window
    int padding = 0;  // trailing repeated-last-frame count
};

// Everything needed to reassemble the source sequence from its windows.
struct WindowIndexMap {
    int source_frames = 0;
    int width = 0;
    double fps = 0.0;
    std::string source_name;
    std::vector<WindowPlacement> placements;
};

struct WindowSet {
    std::vector<MotionSequence> windows;  // each exactly map.width frames
    WindowIndexMap map;
};

enum class StitchPolicy { TakeFirst, TakeLast, SlerpBlend };

const char* to_string(StitchPolicy p);
StitchPolicy stitch_policy_from_string(std::string_view s);

// One non-recursive pass replacing each joint rotation at frame t in
// [0, T-2] with slerp(q_t, q_{t+1}, ratio) over the ORIGINAL values; the
// final frame and all non-rotation fields are untouched.
MotionSequence slerp_average_filter(const MotionSequence& seq, double ratio);

// Fixed-width windows at the given stride; a final partial window is padded
// by repeating the last frame, with the padding recorded in the map so
// reassembly can drop it.
WindowSet sliding_windows(const MotionSequence& seq, const WindowSpec& spec);

// Inverse of sliding_windows. Frames covered by several windows are combined
// per policy: keep the earliest, keep the latest, or crossfade with slerp at
// linearly increasing weight. Padding is dropped.
MotionSequence stitch_windows(const std::vector<MotionSequence>& windows,
                              const WindowIndexMap& map, StitchPolicy policy);

}  // namespace mvkit
