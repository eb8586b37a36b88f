#include "mvkit/metrics.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "mvkit/error.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

namespace {

// Kahan compensated accumulator; keeps reductions deterministic to ~1e-12
// independent of evaluation order.
class KahanSum {
public:
    void add(double v) {
        const double y = v - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void check_pair(const JointSequence& pred, const JointSequence& gt, int min_frames) {
    if (pred.frame_count() != gt.frame_count())
        throw DataError("joint sequences differ in frame count: " +
                        std::to_string(pred.frame_count()) + " vs " +
                        std::to_string(gt.frame_count()));
    if (pred.frame_count() < min_frames)
        throw DataError("joint sequence needs at least " + std::to_string(min_frames) +
                        " frames, got " + std::to_string(pred.frame_count()));
    if (pred.joint_count() != gt.joint_count())
        throw DataError("joint sequences differ in joint count: " +
                        std::to_string(pred.joint_count()) + " vs " +
                        std::to_string(gt.joint_count()));
    for (int t = 0; t < pred.frame_count(); ++t) {
        const auto& a = pred.frames[static_cast<size_t>(t)];
        const auto& b = gt.frames[static_cast<size_t>(t)];
        if (a.rows() != pred.joint_count() || b.rows() != pred.joint_count())
            throw DataError("joint sequence frame " + std::to_string(t) +
                            " has inconsistent joint count");
        if (!a.allFinite() || !b.allFinite())
            throw DataError("joint sequence frame " + std::to_string(t) + " is not finite");
    }
}

double frame_mpjpe_mm(const JointPositions& pred, const JointPositions& gt) {
    const Eigen::RowVector3d root_p = pred.row(0);
    const Eigen::RowVector3d root_g = gt.row(0);
    KahanSum sum;
    for (int j = 0; j < pred.rows(); ++j)
        sum.add(((pred.row(j) - root_p) - (gt.row(j) - root_g)).norm());
    return 1000.0 * sum.value() / static_cast<double>(pred.rows());
}

double frame_pa_mpjpe_mm(const JointPositions& pred, const JointPositions& gt) {
    const JointPositions aligned = procrustes_align(pred, gt).first;
    KahanSum sum;
    for (int j = 0; j < pred.rows(); ++j) sum.add((aligned.row(j) - gt.row(j)).norm());
    return 1000.0 * sum.value() / static_cast<double>(pred.rows());
}

}  // namespace

double mpjpe(const JointSequence& pred, const JointSequence& gt) {
    check_pair(pred, gt, 1);
    KahanSum sum;
    for (int t = 0; t < pred.frame_count(); ++t)
        sum.add(frame_mpjpe_mm(pred.frames[static_cast<size_t>(t)],
                               gt.frames[static_cast<size_t>(t)]));
    return sum.value() / static_cast<double>(pred.frame_count());
}

std::pair<JointPositions, SimilarityTransform> procrustes_align(const JointPositions& pred,
                                                                const JointPositions& gt) {
    if (pred.rows() != gt.rows())
        throw DataError("procrustes frames differ in joint count: " +
                        std::to_string(pred.rows()) + " vs " + std::to_string(gt.rows()));
    const auto n = pred.rows();
    if (n < 3) throw DataError("procrustes needs at least 3 points, got " + std::to_string(n));
    if (!pred.allFinite() || !gt.allFinite())
        throw DataError("procrustes input is not finite");

    const Eigen::RowVector3d mu_p = pred.colwise().mean();
    const Eigen::RowVector3d mu_g = gt.colwise().mean();
    const JointPositions x = pred.rowwise() - mu_p;
    const JointPositions y = gt.rowwise() - mu_g;

    const double var_p = x.squaredNorm() / static_cast<double>(n);
    const Eigen::Matrix3d cov = y.transpose() * x / static_cast<double>(n);

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d d = svd.singularValues();
    if (!(d(1) > 1e-12 * std::max(1.0, d(0))) || var_p <= 0.0)
        throw DataError("procrustes point set is degenerate (covariance rank < 2)");

    Eigen::Vector3d s = Eigen::Vector3d::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) s(2) = -1.0;

    SimilarityTransform st;
    st.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    st.scale = d.dot(s) / var_p;
    st.translation = mu_g.transpose() - st.scale * st.rotation * mu_p.transpose();

    JointPositions aligned =
        (st.scale * (st.rotation * pred.transpose())).transpose().rowwise() +
        st.translation.transpose();
    return {std::move(aligned), st};
}

double pa_mpjpe(const JointSequence& pred, const JointSequence& gt) {
    check_pair(pred, gt, 1);
    KahanSum sum;
    for (int t = 0; t < pred.frame_count(); ++t)
        sum.add(frame_pa_mpjpe_mm(pred.frames[static_cast<size_t>(t)],
                                  gt.frames[static_cast<size_t>(t)]));
    return sum.value() / static_cast<double>(pred.frame_count());
}

double accel_error(const JointSequence& pred, const JointSequence& gt) {
    check_pair(pred, gt, 3);
    if (pred.fps != gt.fps)
        throw DataError("joint sequences differ in fps");
    if (!(pred.fps > 0.0) || !std::isfinite(pred.fps))
        throw DataError("joint sequence fps must be positive and finite");

    const double fps2 = pred.fps * pred.fps;
    const int t_count = pred.frame_count();
    const int joints = pred.joint_count();
    KahanSum sum;
    for (int t = 1; t + 1 < t_count; ++t) {
        const auto& p0 = pred.frames[static_cast<size_t>(t - 1)];
        const auto& p1 = pred.frames[static_cast<size_t>(t)];
        const auto& p2 = pred.frames[static_cast<size_t>(t + 1)];
        const auto& g0 = gt.frames[static_cast<size_t>(t - 1)];
        const auto& g1 = gt.frames[static_cast<size_t>(t)];
        const auto& g2 = gt.frames[static_cast<size_t>(t + 1)];
        for (int j = 0; j < joints; ++j) {
            // Difference the positions first: a_pred - a_gt equals the second
            // difference of (pred - gt), and this grouping makes identical
            // sequences score exactly zero.
            const Eigen::RowVector3d d0 = p0.row(j) - g0.row(j);
            const Eigen::RowVector3d d1 = p1.row(j) - g1.row(j);
            const Eigen::RowVector3d d2 = p2.row(j) - g2.row(j);
            sum.add(((d2 - 2.0 * d1 + d0) * fps2).norm());
        }
    }
    return 1000.0 * sum.value() / static_cast<double>((t_count - 2) * joints);
}

double loss_3d(const JointSequence& pred, const JointSequence& gt) {
    check_pair(pred, gt, 1);
    KahanSum sum;
    for (int t = 0; t < pred.frame_count(); ++t) {
        const auto& a = pred.frames[static_cast<size_t>(t)];
        const auto& b = gt.frames[static_cast<size_t>(t)];
        for (int j = 0; j < pred.joint_count(); ++j) sum.add((a.row(j) - b.row(j)).norm());
    }
    return sum.value();
}

double loss_2d(const std::vector<JointPositions2d>& pred,
               const std::vector<JointPositions2d>& gt) {
    if (pred.size() != gt.size())
        throw DataError("2d joint sequences differ in frame count: " +
                        std::to_string(pred.size()) + " vs " + std::to_string(gt.size()));
    KahanSum sum;
    for (size_t t = 0; t < pred.size(); ++t) {
        const auto& a = pred[t];
        const auto& b = gt[t];
        if (a.rows() != b.rows())
            throw DataError("2d joint frame " + std::to_string(t) +
                            " differs in joint count");
        if (!a.allFinite() || !b.allFinite())
            throw DataError("2d joint frame " + std::to_string(t) + " is not finite");
        for (int j = 0; j < a.rows(); ++j) sum.add((a.row(j) - b.row(j)).norm());
    }
    return sum.value();
}

double loss_smpl(const MotionSequence& pred, const MotionSequence& gt) {
    validate_sequence(pred);
    validate_sequence(gt);
    if (pred.frame_count() != gt.frame_count())
        throw DataError("motion sequences differ in frame count: " +
                        std::to_string(pred.frame_count()) + " vs " +
                        std::to_string(gt.frame_count()));
    if (pred.joint_count() != gt.joint_count())
        throw DataError("motion sequences differ in joint count: " +
                        std::to_string(pred.joint_count()) + " vs " +
                        std::to_string(gt.joint_count()));
    if (pred.frames[0].betas.has_value() != gt.frames[0].betas.has_value())
        throw DataError("motion sequences differ in shape coefficient presence");

    KahanSum total;
    if (pred.frames[0].betas)
        total.add((*pred.frames[0].betas - *gt.frames[0].betas).norm());

    const int joints = pred.joint_count();
    for (int t = 0; t < pred.frame_count(); ++t) {
        KahanSum sq;
        for (int j = 0; j < joints; ++j) {
            const Vector6d a = sixd_encode(matrix_from_quaternion(quaternion_from_axis_angle(
                pred.frames[static_cast<size_t>(t)].rotations[static_cast<size_t>(j)])));
            const Vector6d b = sixd_encode(matrix_from_quaternion(quaternion_from_axis_angle(
                gt.frames[static_cast<size_t>(t)].rotations[static_cast<size_t>(j)])));
            sq.add((a - b).squaredNorm());
        }
        total.add(std::sqrt(sq.value()));
    }
    return total.value();
}

MetricsReport compute_metrics(const JointSequence& pred, const JointSequence& gt,
                              bool per_frame) {
    check_pair(pred, gt, 3);
    if (pred.fps != gt.fps) throw DataError("joint sequences differ in fps");

    MetricsReport r;
    r.frames = pred.frame_count();
    r.joints = pred.joint_count();
    r.fps = pred.fps;
    r.mpjpe_mm = mpjpe(pred, gt);
    r.pa_mpjpe_mm = pa_mpjpe(pred, gt);
    r.accel_err_mm_s2 = accel_error(pred, gt);

    if (per_frame) {
        const double fps2 = pred.fps * pred.fps;
        for (int t = 0; t < r.frames; ++t) {
            const auto& a = pred.frames[static_cast<size_t>(t)];
            const auto& b = gt.frames[static_cast<size_t>(t)];
            r.per_frame_mpjpe_mm.push_back(frame_mpjpe_mm(a, b));
            r.per_frame_pa_mpjpe_mm.push_back(frame_pa_mpjpe_mm(a, b));
        }
        for (int t = 1; t + 1 < r.frames; ++t) {
            KahanSum sum;
            for (int j = 0; j < r.joints; ++j) {
                const Eigen::RowVector3d ap =
                    (pred.frames[static_cast<size_t>(t + 1)].row(j) -
                     2.0 * pred.frames[static_cast<size_t>(t)].row(j) +
                     pred.frames[static_cast<size_t>(t - 1)].row(j)) *
                    fps2;
                const Eigen::RowVector3d ag =
                    (gt.frames[static_cast<size_t>(t + 1)].row(j) -
                     2.0 * gt.frames[static_cast<size_t>(t)].row(j) +
                     gt.frames[static_cast<size_t>(t - 1)].row(j)) *
                    fps2;
                sum.add((ap - ag).norm());
            }
            r.per_frame_accel_err_mm_s2.push_back(1000.0 * sum.value() /
                                                  static_cast<double>(r.joints));
        }
    }
    return r;
}

}  // namespace mvkit
