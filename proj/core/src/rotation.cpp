#include "mvkit/rotation.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace mvkit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool all_finite(const double* p, int n) {
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(p[i])) return false;
    }
    return true;
}

void require_finite(const double* p, int n, const char* what) {
    if (!all_finite(p, n)) {
        throw DataError(std::string("non-finite component in ") + what);
    }
}

}  // namespace

const char* to_string(RotationFormat f) {
    switch (f) {
        case RotationFormat::AxisAngle: return "axis_angle";
        case RotationFormat::Quaternion: return "quaternion";
        case RotationFormat::Matrix: return "matrix";
        case RotationFormat::SixD: return "sixd";
    }
    return "unknown";
}

RotationFormat rotation_format_from_string(std::string_view s) {
    if (s == "axis_angle") return RotationFormat::AxisAngle;
    if (s == "quaternion") return RotationFormat::Quaternion;
    if (s == "matrix") return RotationFormat::Matrix;
    if (s == "sixd") return RotationFormat::SixD;
    throw DataError("unknown rotation representation '" + std::string(s) +
                    "' (expected axis_angle, quaternion, matrix or sixd)");
}

int rotation_dim(RotationFormat f) {
    switch (f) {
        case RotationFormat::AxisAngle: return 3;
        case RotationFormat::Quaternion: return 4;
        case RotationFormat::Matrix: return 9;
        case RotationFormat::SixD: return 6;
    }
    return 0;
}

Eigen::Vector4d canonical_quaternion(const Eigen::Vector4d& q) {
    require_finite(q.data(), 4, "quaternion");
    const double n = q.norm();
    if (n == 0.0) throw DataError("zero-norm quaternion");
    // Inputs that are already unit to rounding error pass through untouched, so
    // canonicalizing twice hands back the exact same bits.
    Eigen::Vector4d u = q;
    if (std::abs(n - 1.0) > 16.0 * std::numeric_limits<double>::epsilon()) u /= n;
    for (int i = 0; i < 4; ++i) {
        if (u[i] > 0.0) break;
        if (u[i] < 0.0) {
            u = -u;
            break;
        }
    }
    return u;
}

Eigen::Vector4d quaternion_from_axis_angle(const Eigen::Vector3d& aa) {
    require_finite(aa.data(), 3, "axis-angle");
    const double angle = aa.norm();
    double half_sinc;  // sin(angle/2) / angle
    if (angle < 1e-4) {
        // Series sin(x/2)/x = 1/2 - x^2/48 + ...; truncation error < 1e-18.
        half_sinc = 0.5 - angle * angle / 48.0;
    } else {
        half_sinc = std::sin(0.5 * angle) / angle;
    }
    Eigen::Vector4d q;
    q[0] = std::cos(0.5 * angle);
    q.tail<3>() = aa * half_sinc;
    return canonical_quaternion(q);
}

Eigen::Vector3d axis_angle_from_quaternion(const Eigen::Vector4d& q) {
    const Eigen::Vector4d u = canonical_quaternion(q);
    const double w = u[0];
    const Eigen::Vector3d v = u.tail<3>();
    const double s = v.norm();
    if (s < 1e-6) {
        // angle/s = 2/w - 2 s^2 / (3 w^3) + O(s^4); w ~ 1 here.
        return v * (2.0 / w - 2.0 * s * s / (3.0 * w * w * w));
    }
    const double angle = 2.0 * std::atan2(s, w);  // in [0, pi] since w >= 0
    return v * (angle / s);
}

Eigen::Matrix3d matrix_from_quaternion(const Eigen::Vector4d& q) {
    const Eigen::Vector4d u = canonical_quaternion(q);
    const double w = u[0], x = u[1], y = u[2], z = u[3];
    Eigen::Matrix3d m;
    m << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
         2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
         2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return m;
}

Eigen::Vector4d quaternion_from_matrix(const Eigen::Matrix3d& m) {
    require_finite(m.data(), 9, "rotation matrix");
    // Shepperd's method: branch on the largest of trace and diagonal entries.
    Eigen::Vector4d q;
    const double tr = m.trace();
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q[0] = 0.25 * s;
        q[1] = (m(2, 1) - m(1, 2)) / s;
        q[2] = (m(0, 2) - m(2, 0)) / s;
        q[3] = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        q[0] = (m(2, 1) - m(1, 2)) / s;
        q[1] = 0.25 * s;
        q[2] = (m(0, 1) + m(1, 0)) / s;
        q[3] = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        q[0] = (m(0, 2) - m(2, 0)) / s;
        q[1] = (m(0, 1) + m(1, 0)) / s;
        q[2] = 0.25 * s;
        q[3] = (m(1, 2) + m(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        q[0] = (m(1, 0) - m(0, 1)) / s;
        q[1] = (m(0, 2) + m(2, 0)) / s;
        q[2] = (m(1, 2) + m(2, 1)) / s;
        q[3] = 0.25 * s;
    }
    return canonical_quaternion(q);
}

Vector6d sixd_encode(const Eigen::Matrix3d& m) {
    Vector6d v;
    v.head<3>() = m.col(0);
    v.tail<3>() = m.col(1);
    return v;
}

Eigen::Matrix3d sixd_decode(const Vector6d& v) {
    require_finite(v.data(), 6, "sixd rotation");
    const Eigen::Vector3d c0 = v.head<3>();
    const Eigen::Vector3d c1 = v.tail<3>();
    const double n0 = c0.norm();
    if (n0 < 1e-12) throw DataError("degenerate sixd input: first column is zero");
    const Eigen::Vector3d b0 = c0 / n0;
    Eigen::Vector3d r = c1 - b0.dot(c1) * b0;
    const double nr = r.norm();
    if (nr < 1e-12 * std::max(1.0, c1.norm())) {
        throw DataError("degenerate sixd input: columns are parallel");
    }
    const Eigen::Vector3d b1 = r / nr;
    Eigen::Matrix3d m;
    m.col(0) = b0;
    m.col(1) = b1;
    m.col(2) = b0.cross(b1);
    return m;
}

Eigen::Vector4d quaternion_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    const double aw = a[0], bw = b[0];
    const Eigen::Vector3d av = a.tail<3>(), bv = b.tail<3>();
    Eigen::Vector4d q;
    q[0] = aw * bw - av.dot(bv);
    q.tail<3>() = aw * bv + bw * av + av.cross(bv);
    return q;
}

Eigen::Vector4d quaternion_conjugate(const Eigen::Vector4d& q) {
    return Eigen::Vector4d(q[0], -q[1], -q[2], -q[3]);
}

Eigen::Vector3d rotate_vector(const Eigen::Vector4d& q, const Eigen::Vector3d& v) {
    const Eigen::Vector3d u = q.tail<3>();
    const Eigen::Vector3d t = 2.0 * u.cross(v);
    return v + q[0] * t + u.cross(t);
}

Eigen::Vector4d slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DataError("slerp parameter outside [0, 1]");
    const Eigen::Vector4d qa = canonical_quaternion(a);
    Eigen::Vector4d qb = canonical_quaternion(b);
    if (qa == qb || t == 0.0) return qa;
    if (t == 1.0) return qb;
    double dot = qa.dot(qb);
    if (dot < 0.0) {  // shorter arc
        qb = -qb;
        dot = -dot;
    }
    if (dot > 1.0 - 1e-9) {
        // Nearly parallel: acos is ill-conditioned, nlerp is exact enough.
        return canonical_quaternion(Eigen::Vector4d((1.0 - t) * qa + t * qb));
    }
    const double omega = std::acos(std::min(dot, 1.0));
    const double s = std::sin(omega);
    const Eigen::Vector4d q =
        (std::sin((1.0 - t) * omega) / s) * qa + (std::sin(t * omega) / s) * qb;
    return canonical_quaternion(q);
}

double geodesic_distance(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    const Eigen::Vector4d qa = canonical_quaternion(a);
    const Eigen::Vector4d qb = canonical_quaternion(b);
    if (qa == qb) return 0.0;
    const Eigen::Vector4d rel = quaternion_multiply(quaternion_conjugate(qa), qb);
    return 2.0 * std::atan2(rel.tail<3>().norm(), std::abs(rel[0]));
}

Eigen::Vector4d random_rotation(Rng& rng) {
    Eigen::Vector4d q;
    do {
        for (int i = 0; i < 4; ++i) q[i] = rng.normal();
    } while (q.norm() < 1e-12);
    return canonical_quaternion(q);
}

// ---------------------------------------------------------------------------
// Tagged value
// ---------------------------------------------------------------------------

Rotation::Rotation(RotationFormat f, const double* values, int n) : format_(f) {
    std::memcpy(v_.data(), values, static_cast<std::size_t>(n) * sizeof(double));
}

Rotation Rotation::axis_angle(const Eigen::Vector3d& aa) {
    require_finite(aa.data(), 3, "axis-angle");
    return Rotation(RotationFormat::AxisAngle, aa.data(), 3);
}

Rotation Rotation::quaternion(const Eigen::Vector4d& wxyz) {
    const Eigen::Vector4d q = canonical_quaternion(wxyz);
    return Rotation(RotationFormat::Quaternion, q.data(), 4);
}

Rotation Rotation::matrix(const Eigen::Matrix3d& m) {
    require_finite(m.data(), 9, "rotation matrix");
    const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-9 || std::abs(m.determinant() - 1.0) > 1e-9) {
        throw DataError("matrix is not a rotation (orthonormal, det +1) within 1e-9");
    }
    Eigen::Matrix<double, 3, 3, Eigen::RowMajor> rm = m;
    return Rotation(RotationFormat::Matrix, rm.data(), 9);
}

Rotation Rotation::sixd(const Vector6d& v) {
    sixd_decode(v);  // validates
    return Rotation(RotationFormat::SixD, v.data(), 6);
}

Rotation Rotation::identity(RotationFormat f) {
    switch (f) {
        case RotationFormat::AxisAngle: return axis_angle(Eigen::Vector3d::Zero());
        case RotationFormat::Quaternion: return quaternion(Eigen::Vector4d(1, 0, 0, 0));
        case RotationFormat::Matrix: return matrix(Eigen::Matrix3d::Identity());
        case RotationFormat::SixD: {
            Vector6d v;
            v << 1, 0, 0, 0, 1, 0;
            return sixd(v);
        }
    }
    throw DataError("unknown rotation format");
}

Eigen::Vector3d Rotation::as_axis_angle() const {
    switch (format_) {
        case RotationFormat::AxisAngle: return Eigen::Map<const Eigen::Vector3d>(v_.data());
        default: return axis_angle_from_quaternion(as_quaternion());
    }
}

Eigen::Vector4d Rotation::as_quaternion() const {
    switch (format_) {
        case RotationFormat::AxisAngle:
            return quaternion_from_axis_angle(Eigen::Map<const Eigen::Vector3d>(v_.data()));
        case RotationFormat::Quaternion:
            return Eigen::Map<const Eigen::Vector4d>(v_.data());
        case RotationFormat::Matrix:
        case RotationFormat::SixD:
            return quaternion_from_matrix(as_matrix());
    }
    throw DataError("unknown rotation format");
}

Eigen::Matrix3d Rotation::as_matrix() const {
    switch (format_) {
        case RotationFormat::Matrix:
            return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v_.data());
        case RotationFormat::SixD:
            return sixd_decode(Eigen::Map<const Vector6d>(v_.data()));
        default:
            return matrix_from_quaternion(as_quaternion());
    }
}

Vector6d Rotation::as_sixd() const {
    if (format_ == RotationFormat::SixD) return Eigen::Map<const Vector6d>(v_.data());
    return sixd_encode(as_matrix());
}

Rotation convert(const Rotation& r, RotationFormat target) {
    if (r.format() == target) return r;
    switch (target) {
        case RotationFormat::AxisAngle: return Rotation::axis_angle(r.as_axis_angle());
        case RotationFormat::Quaternion: return Rotation::quaternion(r.as_quaternion());
        case RotationFormat::Matrix: return Rotation::matrix(r.as_matrix());
        case RotationFormat::SixD: return Rotation::sixd(r.as_sixd());
    }
    throw DataError("unknown rotation format");
}

Rotation slerp(const Rotation& a, const Rotation& b, double t) {
    const Rotation q = Rotation::quaternion(slerp(a.as_quaternion(), b.as_quaternion(), t));
    return convert(q, a.format());
}

double geodesic_distance(const Rotation& a, const Rotation& b) {
    return geodesic_distance(a.as_quaternion(), b.as_quaternion());
}

}  // namespace mvkit
