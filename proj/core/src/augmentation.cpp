#include "mvkit/augmentation.hpp"

#include <cmath>
#include <cstdio>

#include "mvkit/error.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

void AugmentConfig::validate() const {
    for (double f : speed_factors)
        if (!(f > 0.0) || !std::isfinite(f))
            throw DataError("augment speed factor must be positive and finite");
    if (root_rotation_samples < 0)
        throw DataError("augment root_rotation_samples must be >= 0, got " +
                        std::to_string(root_rotation_samples));
}

namespace {

std::string fmt_factor(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", f);
    return buf;
}

PoseFrame lerp_frames(const PoseFrame& a, const PoseFrame& b, double t) {
    PoseFrame out;
    out.rotations.reserve(a.rotations.size());
    for (size_t j = 0; j < a.rotations.size(); ++j) {
        const Eigen::Vector4d q = slerp(quaternion_from_axis_angle(a.rotations[j]),
                                        quaternion_from_axis_angle(b.rotations[j]), t);
        out.rotations.push_back(axis_angle_from_quaternion(q));
    }
    if (a.betas) out.betas = (1.0 - t) * *a.betas + t * *b.betas;
    if (a.root_translation)
        out.root_translation = (1.0 - t) * *a.root_translation + t * *b.root_translation;
    return out;
}

}  // namespace

MotionSequence resample(const MotionSequence& seq, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw DataError("resample factor must be positive and finite");
    validate_sequence(seq, 2);

    const auto t_count = static_cast<int>(seq.frames.size());
    const auto out_count =
        std::max<long long>(2, std::llround(static_cast<double>(t_count) / factor));

    MotionSequence out;
    out.fps = seq.fps;
    out.name = seq.name + "#speed" + fmt_factor(factor);
    out.frames.reserve(static_cast<size_t>(out_count));
    for (long long i = 0; i < out_count; ++i) {
        const double t = std::min(static_cast<double>(i) * factor,
                                  static_cast<double>(t_count - 1));
        const auto lo = static_cast<size_t>(t);
        const double frac = t - static_cast<double>(lo);
        if (frac == 0.0)
            out.frames.push_back(seq.frames[lo]);
        else
            out.frames.push_back(lerp_frames(seq.frames[lo], seq.frames[lo + 1], frac));
    }
    return out;
}

MotionSequence flip_lr(const MotionSequence& seq, const Skeleton& skel) {
    validate_sequence(seq);
    skel.validate();
    if (seq.joint_count() != skel.joint_count)
        throw DataError("flip_lr: sequence has " + std::to_string(seq.joint_count()) +
                        " joints, skeleton expects " + std::to_string(skel.joint_count));

    MotionSequence out;
    out.fps = seq.fps;
    out.name = seq.name + "#flip";
    out.frames.reserve(seq.frames.size());
    for (const auto& f : seq.frames) {
        PoseFrame g;
        g.rotations.resize(f.rotations.size());
        for (int j = 0; j < skel.joint_count; ++j) {
            const Eigen::Vector3d& r =
                f.rotations[static_cast<size_t>(skel.mirror_map[static_cast<size_t>(j)])];
            g.rotations[static_cast<size_t>(j)] = Eigen::Vector3d(r.x(), -r.y(), -r.z());
        }
        g.betas = f.betas;
        if (f.root_translation)
            g.root_translation = Eigen::Vector3d(-f.root_translation->x(),
                                                 f.root_translation->y(),
                                                 f.root_translation->z());
        out.frames.push_back(std::move(g));
    }
    return out;
}

MotionSequence random_root_rotation(const MotionSequence& seq, uint64_t rng_seed) {
    validate_sequence(seq);
    Rng rng(rng_seed);
    const Eigen::Vector4d q = random_rotation(rng);

    MotionSequence out = seq;
    out.name = seq.name + "#rot" + std::to_string(rng_seed);
    for (auto& f : out.frames)
        f.rotations[0] = axis_angle_from_quaternion(
            quaternion_multiply(q, quaternion_from_axis_angle(f.rotations[0])));
    return out;
}

std::vector<MotionSequence> augment_dataset(const std::vector<MotionSequence>& seqs,
                                            const AugmentConfig& cfg, const Skeleton& skel) {
    cfg.validate();
    const size_t n_speed = std::max<size_t>(1, cfg.speed_factors.size());
    const size_t n_flip = cfg.enable_flip ? 2 : 1;
    const size_t n_rot = 1 + static_cast<size_t>(cfg.root_rotation_samples);

    std::vector<MotionSequence> out;
    out.reserve(seqs.size() * n_speed * n_flip * n_rot);
    for (size_t s = 0; s < seqs.size(); ++s) {
        for (size_t sp = 0; sp < n_speed; ++sp) {
            MotionSequence speed_variant = cfg.speed_factors.empty()
                                               ? seqs[s]
                                               : resample(seqs[s], cfg.speed_factors[sp]);
            for (size_t fl = 0; fl < n_flip; ++fl) {
                MotionSequence flip_variant =
                    fl == 0 ? speed_variant : flip_lr(speed_variant, skel);
                out.push_back(flip_variant);
                for (size_t rr = 1; rr < n_rot; ++rr) {
                    const uint64_t stream =
                        ((s * n_speed + sp) * n_flip + fl) * (n_rot - 1) + (rr - 1);
                    out.push_back(random_root_rotation(flip_variant,
                                                       derive_seed(cfg.rng_seed, stream)));
                }
            }
        }
    }
    return out;
}

}  // namespace mvkit
