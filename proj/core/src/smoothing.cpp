#include "mvkit/smoothing.hpp"

#include <cmath>

#include "mvkit/error.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

void WindowSpec::validate() const {
    if (width < 2)
        throw DataError("window width must be >= 2, got " + std::to_string(width));
    if (stride < 1 || stride > width)
        throw DataError("window stride must be in [1, width], got " + std::to_string(stride));
}

const char* to_string(StitchPolicy p) {
    switch (p) {
        case StitchPolicy::TakeFirst: return "take_first";
        case StitchPolicy::TakeLast: return "take_last";
        case StitchPolicy::SlerpBlend: return "slerp_blend";
    }
    return "?";
}

StitchPolicy stitch_policy_from_string(std::string_view s) {
    if (s == "take_first") return StitchPolicy::TakeFirst;
    if (s == "take_last") return StitchPolicy::TakeLast;
    if (s == "slerp_blend") return StitchPolicy::SlerpBlend;
    throw DataError("unknown stitch policy: " + std::string(s));
}

namespace {

// Slerp in axis-angle terms, preserving bitwise-equal inputs so constant
// sequences and t in {0, 1} stay exact.
Eigen::Vector3d slerp_axis_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 double t) {
    if (a == b || t == 0.0) return a;
    if (t == 1.0) return b;
    return axis_angle_from_quaternion(
        slerp(quaternion_from_axis_angle(a), quaternion_from_axis_angle(b), t));
}

// Crossfade two frames: rotations by slerp, translation and shape linearly.
// Bitwise-equal frames pass through untouched so reassembling unmodified
// windows is exact under every policy.
PoseFrame blend_frames(const PoseFrame& a, const PoseFrame& b, double t) {
    if (bitwise_equal(a, b)) return a;
    PoseFrame out;
    out.rotations.reserve(a.rotations.size());
    for (size_t j = 0; j < a.rotations.size(); ++j)
        out.rotations.push_back(slerp_axis_angle(a.rotations[j], b.rotations[j], t));
    if (a.betas) out.betas = (1.0 - t) * *a.betas + t * *b.betas;
    if (a.root_translation)
        out.root_translation = (1.0 - t) * *a.root_translation + t * *b.root_translation;
    return out;
}

}  // namespace

MotionSequence slerp_average_filter(const MotionSequence& seq, double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw DataError("filter ratio must be in [0, 1]");
    validate_sequence(seq, 2);

    MotionSequence out = seq;
    const size_t t_count = seq.frames.size();
    for (size_t t = 0; t + 1 < t_count; ++t) {
        const PoseFrame& cur = seq.frames[t];
        const PoseFrame& nxt = seq.frames[t + 1];
        for (size_t j = 0; j < cur.rotations.size(); ++j)
            out.frames[t].rotations[j] =
                slerp_axis_angle(cur.rotations[j], nxt.rotations[j], ratio);
    }
    return out;
}

WindowSet sliding_windows(const MotionSequence& seq, const WindowSpec& spec) {
    spec.validate();
    validate_sequence(seq, 2);

    const int t_count = static_cast<int>(seq.frames.size());
    WindowSet set;
    set.map.source_frames = t_count;
    set.map.width = spec.width;
    set.map.fps = seq.fps;
    set.map.source_name = seq.name;

    const int last_start =
        t_count <= spec.width
            ? 0
            : static_cast<int>(
                  (static_cast<long long>(t_count - spec.width) + spec.stride - 1) /
                  spec.stride) *
                  spec.stride;
    for (int start = 0; start <= last_start; start += spec.stride) {
        const int pad = std::max(0, start + spec.width - t_count);
        MotionSequence w;
        w.fps = seq.fps;
        w.name = seq.name + "#w" + std::to_string(set.windows.size());
        w.frames.reserve(static_cast<size_t>(spec.width));
        for (int i = 0; i < spec.width - pad; ++i)
            w.frames.push_back(seq.frames[static_cast<size_t>(start + i)]);
        for (int i = 0; i < pad; ++i)
            w.frames.push_back(seq.frames[static_cast<size_t>(t_count - 1)]);
        set.windows.push_back(std::move(w));
        set.map.placements.push_back({start, pad});
    }
    return set;
}

MotionSequence stitch_windows(const std::vector<MotionSequence>& windows,
                              const WindowIndexMap& map, StitchPolicy policy) {
    if (windows.empty()) throw DataError("stitch: no windows");
    if (windows.size() != map.placements.size())
        throw DataError("stitch: index map lists " + std::to_string(map.placements.size()) +
                        " windows, got " + std::to_string(windows.size()));
    if (map.width < 2 || map.source_frames < 1)
        throw DataError("stitch: index map has invalid width or source frame count");

    MotionSequence out;
    out.fps = map.fps;
    out.name = map.source_name;
    out.frames.reserve(static_cast<size_t>(map.source_frames));

    for (size_t k = 0; k < windows.size(); ++k) {
        const auto& w = windows[k];
        const auto& pl = map.placements[k];
        if (static_cast<int>(w.frames.size()) != map.width)
            throw DataError("stitch: window " + std::to_string(k) + " has " +
                            std::to_string(w.frames.size()) + " frames, map expects " +
                            std::to_string(map.width));
        if (pl.padding < 0 || pl.padding >= map.width)
            throw DataError("stitch: window " + std::to_string(k) + " has invalid padding " +
                            std::to_string(pl.padding));
        const int content = map.width - pl.padding;
        if (pl.start + content > map.source_frames)
            throw DataError("stitch: window " + std::to_string(k) +
                            " extends past the source sequence");

        const int have = static_cast<int>(out.frames.size());
        if (pl.start > have)
            throw DataError("stitch: gap before window " + std::to_string(k) +
                            " (starts at frame " + std::to_string(pl.start) + ", have " +
                            std::to_string(have) + ")");
        const int overlap = std::min(have - pl.start, content);
        for (int i = 0; i < overlap; ++i) {
            PoseFrame& dst = out.frames[static_cast<size_t>(pl.start + i)];
            const PoseFrame& src = w.frames[static_cast<size_t>(i)];
            switch (policy) {
                case StitchPolicy::TakeFirst: break;
                case StitchPolicy::TakeLast: dst = src; break;
                case StitchPolicy::SlerpBlend:
                    dst = blend_frames(dst, src,
                                       static_cast<double>(i + 1) /
                                           static_cast<double>(overlap + 1));
                    break;
            }
        }
        for (int i = overlap; i < content; ++i)
            out.frames.push_back(w.frames[static_cast<size_t>(i)]);
    }

    if (static_cast<int>(out.frames.size()) != map.source_frames)
        throw DataError("stitch: reassembled " + std::to_string(out.frames.size()) +
                        " frames, map expects " + std::to_string(map.source_frames));
    return out;
}

}  // namespace mvkit
