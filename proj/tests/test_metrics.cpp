#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "doctest.h"

#include "mvkit/error.hpp"
#include "mvkit/metrics.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/rotation.hpp"
#include "mvkit/skeleton.hpp"
#include "mvkit/synthetic.hpp"
#include "test_support.hpp"

using namespace mvkit;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

JointSequence random_joints(int frames, int joints, uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    JointSequence js;
    js.fps = 30.0;
    for (int t = 0; t < frames; ++t) {
        JointPositions p(joints, 3);
        for (int j = 0; j < joints; ++j)
            for (int c = 0; c < 3; ++c) p(j, c) = scale * rng.normal();
        js.frames.push_back(std::move(p));
    }
    return js;
}

JointSequence transformed_copy(const JointSequence& src, uint64_t seed) {
    Rng rng(seed);
    const Eigen::Matrix3d r = matrix_from_quaternion(random_rotation(rng));
    const double s = rng.uniform(0.4, 2.5);
    const Eigen::RowVector3d t(rng.normal(), rng.normal(), rng.normal());
    JointSequence out = src;
    for (auto& f : out.frames) f = ((s * (r * f.transpose())).transpose().rowwise() + t).eval();
    return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mpjpe matches the hand computation") {
    JointSequence pred, gt;
    pred.fps = gt.fps = 30.0;
    JointPositions p(3, 3), g(3, 3);
    p << 1.0, 0.0, 0.0,
         1.3, 0.0, 0.0,
         1.0, 0.4, 0.0;
    g << 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0,
         0.0, 0.0, 0.0;
    pred.frames = {p};
    gt.frames = {g};
    // Root-relative residuals: 0, 0.3, 0.4 -> mean 0.7/3 m -> 700/3 mm.
    CHECK(mpjpe(pred, gt) == doctest::Approx(700.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("mpjpe ignores global translation of either side") {
    const JointSequence a = random_joints(4, 10, 31);
    JointSequence b = a;
    for (auto& f : b.frames) f = (f.rowwise() + Eigen::RowVector3d(3, -2, 9)).eval();
    const JointSequence c = random_joints(4, 10, 32);
    CHECK(mpjpe(a, c) == doctest::Approx(mpjpe(b, c)).epsilon(1e-12));
}

TEST_CASE("procrustes recovers a synthetic similarity transform") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const JointSequence base = random_joints(1, 6, 100 + seed);
        const JointSequence moved = transformed_copy(base, 200 + seed);
        const auto [aligned, st] = procrustes_align(base.frames[0], moved.frames[0]);
        CHECK((aligned - moved.frames[0]).norm() < 1e-9);
        CHECK(st.scale > 0.0);
        CHECK(st.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("procrustes never fits a reflection") {
    // gt is a mirrored copy; the best proper rotation cannot reach it.
    const JointSequence base = random_joints(1, 8, 33);
    JointPositions mirrored = base.frames[0];
    mirrored.col(0) *= -1.0;
    const auto [aligned, st] = procrustes_align(base.frames[0], mirrored);
    CHECK(st.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((aligned - mirrored).norm() > 1e-3);
}

TEST_CASE("pa-mpjpe of a similarity-transformed copy is zero") {
    const JointSequence base = random_joints(5, 12, 34);
    const JointSequence moved = transformed_copy(base, 35);
    CHECK(pa_mpjpe(moved, base) < 1e-9);
    CHECK(pa_mpjpe(base, moved) < 1e-9);
}

TEST_CASE("pa-mpjpe never exceeds mpjpe") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        const JointSequence a = random_joints(3, 8, 400 + seed);
        const JointSequence b = random_joints(3, 8, 500 + seed);
        CHECK(pa_mpjpe(a, b) <= mpjpe(a, b) + 1e-9);
    }
}

TEST_CASE("procrustes rejects degenerate point sets") {
    JointPositions line(4, 3), ok(4, 3);
    for (int j = 0; j < 4; ++j) {
        line.row(j) = Eigen::RowVector3d(j, 2.0 * j, -j);  // collinear: rank 1
        ok.row(j) = Eigen::RowVector3d(j, j * j, 1.0);
    }
    CHECK_THROWS_WITH_AS(procrustes_align(line, ok), doctest::Contains("degenerate"),
                         DataError);

    JointPositions two(2, 3);
    two << 0, 0, 0, 1, 1, 1;
    CHECK_THROWS_AS(procrustes_align(two, two), DataError);
}

TEST_CASE("acceleration error vanishes for affine-in-time discrepancies") {
    const JointSequence gt = random_joints(12, 6, 36);
    JointSequence pred = gt;
    Rng rng(37);
    const Eigen::RowVector3d a(rng.normal(), rng.normal(), rng.normal());
    const Eigen::RowVector3d b(rng.normal(), rng.normal(), rng.normal());
    for (int t = 0; t < pred.frame_count(); ++t)
        pred.frames[static_cast<size_t>(t)] =
            (pred.frames[static_cast<size_t>(t)].rowwise() + (a + t * b)).eval();
    CHECK(accel_error(pred, gt) < 1e-9);
}

TEST_CASE("acceleration error of a translational sinusoid matches the discrete identity") {
    // p(t) = base + u sin(w t): the central second difference has the exact
    // closed form -4 fps^2 sin^2(w h / 2) sin(w t) u.
    const double fps = 100.0, freq = 1.0;
    const double w = kTau * freq, h = 1.0 / fps;
    const Eigen::RowVector3d u(0.02, -0.01, 0.03);
    const int frames = 50, joints = 4;

    JointSequence gt = random_joints(1, joints, 38);
    JointSequence pred;
    pred.fps = gt.fps = fps;
    JointSequence still;
    still.fps = fps;
    for (int t = 0; t < frames; ++t) {
        const double s = std::sin(w * t * h);
        pred.frames.push_back((gt.frames[0].rowwise() + s * u).eval());
        still.frames.push_back(gt.frames[0]);
    }

    double expect = 0.0;
    const double amp = 4.0 * fps * fps * std::sin(w * h / 2.0) * std::sin(w * h / 2.0);
    for (int t = 1; t + 1 < frames; ++t)
        expect += joints * amp * std::abs(std::sin(w * t * h)) * u.norm();
    expect = 1000.0 * expect / ((frames - 2) * joints);

    const double measured = accel_error(pred, still);
    CHECK(measured == doctest::Approx(expect).epsilon(1e-10));

    // And the continuum analytic value w^2 |sin| differs only by 1 - sinc^2.
    double analytic = 0.0;
    for (int t = 1; t + 1 < frames; ++t)
        analytic += joints * w * w * std::abs(std::sin(w * t * h)) * u.norm();
    analytic = 1000.0 * analytic / ((frames - 2) * joints);
    const double sinc = std::sin(w * h / 2.0) / (w * h / 2.0);
    CHECK(std::abs(measured - analytic) / analytic ==
          doctest::Approx(1.0 - sinc * sinc).epsilon(1e-6));
}

TEST_CASE("fk acceleration error converges at second order in the frame rate") {
    // Error against the rigid-subtree closed form shrinks ~4x when fps doubles.
    auto metric_minus_analytic = [](double fps) {
        SyntheticParams p;
        p.frames = static_cast<int>(fps);  // one second
        p.fps = fps;
        p.amplitude = 0.4;
        p.frequency = 0.8;
        const MotionSequence moving =
            generate_synthetic(SyntheticKind::SingleAxisSine, p, 1);
        SyntheticParams q = p;
        q.amplitude = 0.0;
        const MotionSequence still = generate_synthetic(SyntheticKind::SingleAxisSine, q, 1);

        const Skeleton skel = default_skeleton();
        const double measured =
            accel_error(fk_sequence(skel, moving), fk_sequence(skel, still));

        // Analytic: every joint in the driven subtree rotates rigidly about
        // the driven joint's (fixed) center; |a| = rho * sqrt(th''^2 + th'^4).
        const JointPositions rest = forward_kinematics(skel, PoseFrame::identity());
        std::vector<int> subtree;
        for (int j = 0; j < skel.joint_count; ++j) {
            int k = j;
            while (k != -1 && k != p.joint) k = skel.parents[static_cast<size_t>(k)];
            if (k == p.joint && j != p.joint) subtree.push_back(j);
        }
        const double w = kTau * p.frequency;
        double sum = 0.0;
        for (int t = 1; t + 1 < p.frames; ++t) {
            const double ts = t / p.fps;
            const double th1 = p.amplitude * w * std::cos(w * ts);
            const double th2 = -p.amplitude * w * w * std::sin(w * ts);
            const double mag = std::sqrt(th2 * th2 + th1 * th1 * th1 * th1);
            for (int j : subtree) {
                const Eigen::RowVector3d d = rest.row(j) - rest.row(p.joint);
                sum += std::hypot(d(0), d(1)) * mag;  // in-plane radius, axis = z
            }
        }
        const double analytic =
            1000.0 * sum / static_cast<double>((p.frames - 2) * skel.joint_count);
        return std::abs(measured - analytic);
    };

    const double err30 = metric_minus_analytic(30.0);
    const double err60 = metric_minus_analytic(60.0);
    CHECK(err30 / err60 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("losses match hand values") {
    JointSequence pred, gt;
    pred.fps = gt.fps = 30.0;
    for (int t = 0; t < 2; ++t) {
        JointPositions p(2, 3), g(2, 3);
        g.setZero();
        p << 3.0, 4.0, 0.0,
             0.0, 3.0, 4.0;
        pred.frames.push_back(p);
        gt.frames.push_back(g);
    }
    CHECK(loss_3d(pred, gt) == doctest::Approx(20.0).epsilon(1e-15));

    std::vector<JointPositions2d> p2(2), g2(2);
    for (int t = 0; t < 2; ++t) {
        p2[static_cast<size_t>(t)] = JointPositions2d(1, 2);
        p2[static_cast<size_t>(t)] << 3.0, 4.0;
        g2[static_cast<size_t>(t)] = JointPositions2d::Zero(1, 2);
    }
    CHECK(loss_2d(p2, g2) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("smpl loss: single rotated joint gives 2*sqrt(2)*sin(angle/2) per frame") {
    // The 6-DoF difference of Rz(a) vs identity has squared norm
    // 2 * ((cos a - 1)^2 + sin^2 a) = 8 sin^2(a/2).
    const double angle = 0.6;
    MotionSequence pred, gt;
    pred.fps = gt.fps = 30.0;
    for (int t = 0; t < 3; ++t) {
        PoseFrame a = PoseFrame::identity(4);
        PoseFrame b = PoseFrame::identity(4);
        a.rotations[2] = Eigen::Vector3d(0, 0, angle);
        pred.frames.push_back(a);
        gt.frames.push_back(b);
    }
    const double per_frame = 2.0 * std::sqrt(2.0) * std::sin(angle / 2.0);
    CHECK(loss_smpl(pred, gt) == doctest::Approx(3.0 * per_frame).epsilon(1e-12));
    CHECK(loss_smpl(gt, gt) == 0.0);

    // Betas enter once, through the first frame.
    MotionSequence pb = pred, gb = gt;
    for (auto& f : pb.frames) f.betas = ShapeCoeffs::Zero();
    for (auto& f : gb.frames) f.betas = ShapeCoeffs::Zero();
    (*pb.frames[0].betas)(1) = 0.5;
    CHECK(loss_smpl(pb, gb) ==
          doctest::Approx(3.0 * per_frame + 0.5).epsilon(1e-12));
}

TEST_CASE("compute_metrics agrees with the individual metrics") {
    const JointSequence a = random_joints(8, 6, 39);
    const JointSequence b = random_joints(8, 6, 40);
    const MetricsReport r = compute_metrics(a, b, true);
    CHECK(r.mpjpe_mm == mpjpe(a, b));
    CHECK(r.pa_mpjpe_mm == pa_mpjpe(a, b));
    CHECK(r.accel_err_mm_s2 == accel_error(a, b));
    CHECK(r.frames == 8);
    CHECK(r.joints == 6);
    CHECK(r.fps == 30.0);
    REQUIRE(r.per_frame_mpjpe_mm.size() == 8);
    REQUIRE(r.per_frame_pa_mpjpe_mm.size() == 8);
    REQUIRE(r.per_frame_accel_err_mm_s2.size() == 6);

    double mean = 0.0;
    for (double v : r.per_frame_mpjpe_mm) mean += v;
    CHECK(mean / 8.0 == doctest::Approx(r.mpjpe_mm).epsilon(1e-12));

    const MetricsReport lean = compute_metrics(a, b);
    CHECK(lean.per_frame_mpjpe_mm.empty());
}

TEST_CASE("metric preconditions are enforced") {
    const JointSequence a = random_joints(4, 6, 41);
    JointSequence b = random_joints(5, 6, 42);
    CHECK_THROWS_AS(mpjpe(a, b), DataError);

    b = random_joints(4, 7, 43);
    CHECK_THROWS_AS(mpjpe(a, b), DataError);

    b = a;
    b.fps = 60.0;
    CHECK_THROWS_AS(accel_error(a, b), DataError);
    CHECK_THROWS_AS(compute_metrics(a, b), DataError);

    JointSequence two = a;
    two.frames.resize(2);
    CHECK_THROWS_AS(accel_error(two, two), DataError);

    JointSequence bad = a;
    bad.frames[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(mpjpe(bad, a), DataError);
}

}  // TEST_SUITE
