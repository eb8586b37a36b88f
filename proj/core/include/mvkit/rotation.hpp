#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

#include "mvkit/error.hpp"
#include "mvkit/rng.hpp"

namespace mvkit {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// The four interchangeable encodings of a 3D rotation.
//   AxisAngle  - 3 reals, radians * unit axis (unrestricted magnitude on input)
//   Quaternion - 4 reals (w, x, y, z), unit norm, canonical w >= 0
//   Matrix     - 9 reals, row-major orthonormal matrix with det +1
//   SixD       - 6 reals, the first two matrix columns stacked (continuous
//                encoding; decoded by Gram-Schmidt)
enum class RotationFormat { AxisAngle, Quaternion, Matrix, SixD };

const char* to_string(RotationFormat f);
RotationFormat rotation_format_from_string(std::string_view s);
int rotation_dim(RotationFormat f);  // 3, 4, 9, 6

// ---------------------------------------------------------------------------
// Low-level conversions on raw Eigen types. All functions are pure.
// Quaternions are stored (w, x, y, z).
// ---------------------------------------------------------------------------

// Normalizes and flips sign so w >= 0; a w == 0 tie is resolved by making the
// first nonzero component positive. Idempotent. Throws DataError for a zero
// or non-finite quaternion.
Eigen::Vector4d canonical_quaternion(const Eigen::Vector4d& q);

Eigen::Vector4d quaternion_from_axis_angle(const Eigen::Vector3d& aa);
// Returns the canonical representative: angle in [0, pi].
Eigen::Vector3d axis_angle_from_quaternion(const Eigen::Vector4d& q);

Eigen::Matrix3d matrix_from_quaternion(const Eigen::Vector4d& q);
Eigen::Vector4d quaternion_from_matrix(const Eigen::Matrix3d& m);

// First two columns of the matrix, stacked column-major.
Vector6d sixd_encode(const Eigen::Matrix3d& m);
// Gram-Schmidt: normalize column one, orthonormalize column two against it,
// third column by cross product. Throws DataError when the first column is
// zero or the columns are parallel.
Eigen::Matrix3d sixd_decode(const Vector6d& v);

Eigen::Vector4d quaternion_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
Eigen::Vector4d quaternion_conjugate(const Eigen::Vector4d& q);
Eigen::Vector3d rotate_vector(const Eigen::Vector4d& q, const Eigen::Vector3d& v);

// Shortest-arc spherical interpolation between unit quaternions. Falls back
// to normalized linear interpolation when |dot| > 1 - 1e-9. slerp(a, b, 0)
// returns a exactly and slerp(a, b, 1) returns the sign-matched b exactly.
Eigen::Vector4d slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b, double t);

// Relative rotation angle in [0, pi].
double geodesic_distance(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

// Uniform over the rotation group: normalized 4D Gaussian quaternion.
Eigen::Vector4d random_rotation(Rng& rng);

// ---------------------------------------------------------------------------
// Representation-tagged rotation value. Factories validate the stored
// representation's invariants and throw DataError on violation; values are
// immutable afterwards.
// ---------------------------------------------------------------------------
class Rotation {
public:
    static Rotation axis_angle(const Eigen::Vector3d& aa);
    // Accepts any nonzero finite quaternion; normalized and canonicalized.
    static Rotation quaternion(const Eigen::Vector4d& wxyz);
    // Requires orthonormality and det +1 within 1e-9.
    static Rotation matrix(const Eigen::Matrix3d& m);
    // Requires a decodable pair of columns (nonzero, non-parallel).
    static Rotation sixd(const Vector6d& v);
    static Rotation identity(RotationFormat f = RotationFormat::Quaternion);

    RotationFormat format() const { return format_; }

    // Converting accessors; conversion is independent of the stored format.
    Eigen::Vector3d as_axis_angle() const;
    Eigen::Vector4d as_quaternion() const;
    Eigen::Matrix3d as_matrix() const;
    Vector6d as_sixd() const;

    // Raw stored coefficients, rotation_dim(format()) of them.
    const double* data() const { return v_.data(); }

private:
    Rotation(RotationFormat f, const double* values, int n);

    RotationFormat format_ = RotationFormat::Quaternion;
    std::array<double, 9> v_{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
};

// Semantic rotation is preserved (geodesic distance < 1e-9 rad); converting
// to the stored format returns the value unchanged.
Rotation convert(const Rotation& r, RotationFormat target);

// Result carries the first operand's format.
Rotation slerp(const Rotation& a, const Rotation& b, double t);
double geodesic_distance(const Rotation& a, const Rotation& b);

}  // namespace mvkit
