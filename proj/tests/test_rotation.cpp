#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/LU>

#include "doctest.h"

#include "mvkit/error.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/rotation.hpp"

using namespace mvkit;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_SUITE("rotation") {

TEST_CASE("canonical quaternion normalizes and fixes the sign") {
    const Eigen::Vector4d q = canonical_quaternion(Eigen::Vector4d(-2.0, 0.0, 0.0, 2.0));
    CHECK(q(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(q(3) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-15));

    // Idempotent.
    const Eigen::Vector4d q2 = canonical_quaternion(q);
    CHECK(q2 == q);

    // w == 0 tie: first nonzero component becomes positive.
    const Eigen::Vector4d tie = canonical_quaternion(Eigen::Vector4d(0.0, -1.0, 0.0, 0.0));
    CHECK(tie(1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(canonical_quaternion(Eigen::Vector4d::Zero()), DataError);
    CHECK_THROWS_AS(canonical_quaternion(Eigen::Vector4d(
                        std::numeric_limits<double>::quiet_NaN(), 0, 0, 1)),
                    DataError);
}

TEST_CASE("axis-angle / quaternion round trip is exact to 1e-12") {
    Rng rng(11);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector4d q = random_rotation(rng);
        const Eigen::Vector4d back = quaternion_from_axis_angle(axis_angle_from_quaternion(q));
        worst = std::max(worst, geodesic_distance(q, back));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("axis-angle from quaternion returns the canonical angle in [0, pi]") {
    // 3/2 pi about +z is the same rotation as pi/2 about -z.
    const Eigen::Vector3d aa(0.0, 0.0, 1.5 * kPi);
    const Eigen::Vector3d canon = axis_angle_from_quaternion(quaternion_from_axis_angle(aa));
    CHECK(canon.norm() == doctest::Approx(0.5 * kPi).epsilon(1e-12));
    CHECK(canon(2) == doctest::Approx(-0.5 * kPi).epsilon(1e-12));
}

TEST_CASE("matrix round trip and orthonormality") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector4d q = random_rotation(rng);
        const Eigen::Matrix3d m = matrix_from_quaternion(q);
        CHECK((m * m.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
        CHECK(geodesic_distance(q, quaternion_from_matrix(m)) < 1e-12);
    }
}

TEST_CASE("sixd of a 90 degree z rotation matches the hand value") {
    const Eigen::Matrix3d rz = matrix_from_quaternion(
        quaternion_from_axis_angle(Eigen::Vector3d(0, 0, 0.5 * kPi)));
    const Vector6d v = sixd_encode(rz);
    // Columns (0,1,0) and (-1,0,0), stacked column-major.
    CHECK(v(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v(2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v(3) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(v(4) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v(5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sixd decode orthonormalizes perturbed inputs") {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        Vector6d v;
        for (int k = 0; k < 6; ++k) v(k) = rng.uniform(-1.0, 1.0);
        if (v.head<3>().norm() < 1e-3) v(0) += 1.0;
        const Eigen::Matrix3d m = sixd_decode(v);
        CHECK((m * m.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
        CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // decode(encode(R)) == R for true rotations.
    for (int i = 0; i < 100; ++i) {
        const Eigen::Matrix3d m = matrix_from_quaternion(random_rotation(rng));
        CHECK((sixd_decode(sixd_encode(m)) - m).norm() < 1e-12);
    }
}

TEST_CASE("sixd decode rejects degenerate inputs") {
    Vector6d zero_first = Vector6d::Zero();
    zero_first(3) = 1.0;
    CHECK_THROWS_AS(sixd_decode(zero_first), DataError);

    Vector6d parallel;
    parallel << 1, 0, 0, 2, 0, 0;
    CHECK_THROWS_AS(sixd_decode(parallel), DataError);
}

TEST_CASE("quaternion multiply and rotate_vector match hand values") {
    const Eigen::Vector4d qz = quaternion_from_axis_angle(Eigen::Vector3d(0, 0, 0.5 * kPi));
    const Eigen::Vector3d r = rotate_vector(qz, Eigen::Vector3d(1, 0, 0));
    CHECK(r(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r(2) == doctest::Approx(0.0).epsilon(1e-15));

    const Eigen::Vector4d qx = quaternion_from_axis_angle(Eigen::Vector3d(0.5 * kPi, 0, 0));
    const Eigen::Matrix3d lhs = matrix_from_quaternion(quaternion_multiply(qz, qx));
    const Eigen::Matrix3d rhs = matrix_from_quaternion(qz) * matrix_from_quaternion(qx);
    CHECK((lhs - rhs).norm() < 1e-14);

    // Conjugate is the inverse.
    const Eigen::Vector4d round = quaternion_multiply(qz, quaternion_conjugate(qz));
    CHECK(geodesic_distance(round, Eigen::Vector4d(1, 0, 0, 0)) < 1e-14);
}

TEST_CASE("slerp endpoints are exact and the midpoint matches the hand value") {
    Rng rng(14);
    const Eigen::Vector4d a = random_rotation(rng);
    const Eigen::Vector4d b = random_rotation(rng);
    CHECK(slerp(a, b, 0.0) == a);
    CHECK(geodesic_distance(slerp(a, b, 1.0), b) < 1e-12);

    const Eigen::Vector4d id(1, 0, 0, 0);
    const Eigen::Vector4d qz = quaternion_from_axis_angle(Eigen::Vector3d(0, 0, 0.5 * kPi));
    const Eigen::Vector4d third = slerp(id, qz, 1.0 / 3.0);
    CHECK(third(0) == doctest::Approx(0.96592582628906831).epsilon(1e-14));  // cos(15 deg)
    CHECK(third(3) == doctest::Approx(0.25881904510252074).epsilon(1e-14));  // sin(15 deg)
}

TEST_CASE("slerp takes the shorter arc and ignores quaternion sign") {
    Rng rng(15);
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector4d a = random_rotation(rng);
        const Eigen::Vector4d b = random_rotation(rng);
        const double t = rng.uniform();
        CHECK(geodesic_distance(slerp(a, b, t), slerp(a, (-b).eval(), t)) < 1e-12);
        // Interpolant never exceeds the endpoint distance.
        CHECK(geodesic_distance(a, slerp(a, b, t)) <= geodesic_distance(a, b) + 1e-12);
    }
}

TEST_CASE("slerp falls back to nlerp for nearly identical rotations") {
    const Eigen::Vector4d a(1, 0, 0, 0);
    const Eigen::Vector4d b = quaternion_from_axis_angle(Eigen::Vector3d(0, 0, 1e-13));
    const Eigen::Vector4d mid = slerp(a, b, 0.5);
    CHECK(mid.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(geodesic_distance(a, mid) <= geodesic_distance(a, b) + 1e-15);
}

TEST_CASE("geodesic distance matches the hand value and is a metric") {
    const Eigen::Vector4d qz = quaternion_from_axis_angle(Eigen::Vector3d(0, 0, 0.5 * kPi));
    const Eigen::Vector4d qx = quaternion_from_axis_angle(Eigen::Vector3d(0.5 * kPi, 0, 0));
    CHECK(geodesic_distance(qz, qx) == doctest::Approx(2.0943951023931953).epsilon(1e-14));
    CHECK(geodesic_distance(qz, qz) == 0.0);
    CHECK(geodesic_distance(qz, (-qz).eval()) == doctest::Approx(0.0));
    CHECK(geodesic_distance(qz, qx) == doctest::Approx(geodesic_distance(qx, qz)));
}

TEST_CASE("rotation format names round trip") {
    for (RotationFormat f : {RotationFormat::AxisAngle, RotationFormat::Quaternion,
                             RotationFormat::Matrix, RotationFormat::SixD})
        CHECK(rotation_format_from_string(to_string(f)) == f);
    CHECK(rotation_dim(RotationFormat::AxisAngle) == 3);
    CHECK(rotation_dim(RotationFormat::Quaternion) == 4);
    CHECK(rotation_dim(RotationFormat::Matrix) == 9);
    CHECK(rotation_dim(RotationFormat::SixD) == 6);
    CHECK_THROWS_AS(rotation_format_from_string("euler"), DataError);
}

TEST_CASE("Rotation factories validate their invariants") {
    CHECK_THROWS_AS(Rotation::quaternion(Eigen::Vector4d::Zero()), DataError);

    Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
    reflect(0, 0) = -1.0;  // det -1
    CHECK_THROWS_AS(Rotation::matrix(reflect), DataError);

    Eigen::Matrix3d skewed = Eigen::Matrix3d::Identity();
    skewed(0, 1) = 0.1;  // not orthonormal
    CHECK_THROWS_AS(Rotation::matrix(skewed), DataError);

    Vector6d parallel;
    parallel << 1, 0, 0, 1, 0, 0;
    CHECK_THROWS_AS(Rotation::sixd(parallel), DataError);

    const Rotation id = Rotation::identity();
    CHECK(id.format() == RotationFormat::Quaternion);
    CHECK(id.as_axis_angle().norm() == 0.0);
}

TEST_CASE("convert preserves the rotation and is the identity on the stored format") {
    Rng rng(16);
    for (int i = 0; i < 100; ++i) {
        const Rotation r = Rotation::quaternion(random_rotation(rng));
        const Rotation chain = convert(
            convert(convert(convert(r, RotationFormat::SixD), RotationFormat::Matrix),
                    RotationFormat::AxisAngle),
            RotationFormat::Quaternion);
        CHECK(geodesic_distance(r, chain) < 1e-12);

        const Rotation same = convert(r, r.format());
        CHECK(std::memcmp(same.data(), r.data(), sizeof(double) * 4) == 0);
    }
}

TEST_CASE("rotation slerp wrapper preserves the first operand's format") {
    const Rotation a = Rotation::axis_angle(Eigen::Vector3d(0.1, 0.2, 0.3));
    const Rotation b = Rotation::axis_angle(Eigen::Vector3d(-0.3, 0.1, 0.4));
    const Rotation mid = slerp(a, b, 0.5);
    CHECK(mid.format() == RotationFormat::AxisAngle);
    CHECK(geodesic_distance(mid, a) == doctest::Approx(geodesic_distance(mid, b)).epsilon(1e-12));
}

TEST_CASE("random rotations are unit quaternions and deterministic per seed") {
    Rng a(99), b(99), c(100);
    const Eigen::Vector4d qa = random_rotation(a);
    CHECK(qa.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qa == random_rotation(b));
    CHECK(qa != random_rotation(c));
}

}  // TEST_SUITE
