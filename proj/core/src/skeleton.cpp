#include "mvkit/skeleton.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mvkit/error.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void Skeleton::validate() const {
    if (joint_count < 1)
        throw DataError("skeleton joint_count must be >= 1, got " + std::to_string(joint_count));
    const auto n = static_cast<size_t>(joint_count);
    if (parents.size() != n)
        throw DataError("skeleton parents has " + std::to_string(parents.size()) +
                        " entries, expected " + std::to_string(joint_count));
    if (rest_offsets.size() != n)
        throw DataError("skeleton offsets has " + std::to_string(rest_offsets.size()) +
                        " rows, expected " + std::to_string(joint_count));
    if (mirror_map.size() != n)
        throw DataError("skeleton mirror has " + std::to_string(mirror_map.size()) +
                        " entries, expected " + std::to_string(joint_count));

    int roots = 0;
    for (int j = 0; j < joint_count; ++j) {
        const int p = parents[static_cast<size_t>(j)];
        if (p == -1) {
            ++roots;
            continue;
        }
        if (p < 0 || p >= joint_count)
            throw DataError("skeleton parent of joint " + std::to_string(j) +
                            " is out of range: " + std::to_string(p));
        // Topological order doubles as the acyclicity check: a back or self
        // edge is exactly a cycle through this joint.
        if (p >= j)
            throw DataError("skeleton parent cycle at joint " + std::to_string(j) +
                            " (parent " + std::to_string(p) + " does not precede it)");
    }
    if (roots != 1)
        throw DataError("skeleton must have exactly one root, found " + std::to_string(roots));
    if (parents[0] != -1)
        throw DataError("skeleton joint 0 must be the root");

    for (int j = 0; j < joint_count; ++j) {
        if (!rest_offsets[static_cast<size_t>(j)].allFinite())
            throw DataError("skeleton offset of joint " + std::to_string(j) + " is not finite");
        const int m = mirror_map[static_cast<size_t>(j)];
        if (m < 0 || m >= joint_count)
            throw DataError("skeleton mirror of joint " + std::to_string(j) +
                            " is out of range: " + std::to_string(m));
        if (mirror_map[static_cast<size_t>(m)] != j)
            throw DataError("skeleton mirror is not an involution at joint " +
                            std::to_string(j));
    }

    if (shape_basis) {
        if (shape_basis->size() != n)
            throw DataError("skeleton shape_basis has " + std::to_string(shape_basis->size()) +
                            " rows, expected " + std::to_string(joint_count));
        for (int j = 0; j < joint_count; ++j)
            if (!(*shape_basis)[static_cast<size_t>(j)].allFinite())
                throw DataError("skeleton shape_basis of joint " + std::to_string(j) +
                                " is not finite");
    }
}

Eigen::Vector3d Skeleton::shaped_offset(int joint, const std::optional<ShapeCoeffs>& betas) const {
    Eigen::Vector3d off = rest_offsets[static_cast<size_t>(joint)];
    if (betas && shape_basis)
        off += (*shape_basis)[static_cast<size_t>(joint)] * (*betas);
    return off;
}

void WeakPerspectiveCamera::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DataError("camera scale must be positive and finite, got " + fmt_double(scale));
    if (!std::isfinite(t_x) || !std::isfinite(t_y))
        throw DataError("camera translation is not finite");
}

Skeleton default_skeleton() {
    Skeleton s;
    s.joint_count = kSmplJointCount;
    s.parents = {-1, 0, 0,  0,  1,  2,  3,  4,  5,  6,  7,  8,
                 9,  9, 9,  12, 13, 14, 16, 17, 18, 19, 20, 21};
    s.mirror_map = {0,  2,  1,  3,  5,  4,  6,  8,  7,  9,  11, 10,
                    12, 14, 13, 15, 17, 16, 19, 18, 21, 20, 23, 22};
    s.rest_offsets = {
        {0.0, 0.0, 0.0},      // pelvis (root)
        {0.09, -0.09, 0.0},   // left hip
        {-0.09, -0.09, 0.0},  // right hip
        {0.0, 0.11, 0.0},     // lower spine
        {0.0, -0.38, 0.0},    // left knee
        {0.0, -0.38, 0.0},    // right knee
        {0.0, 0.13, 0.0},     // mid spine
        {0.0, -0.4, 0.0},     // left ankle
        {0.0, -0.4, 0.0},     // right ankle
        {0.0, 0.06, 0.0},     // upper spine
        {0.0, -0.06, 0.13},   // left foot
        {0.0, -0.06, 0.13},   // right foot
        {0.0, 0.22, 0.0},     // neck
        {0.08, 0.12, 0.0},    // left collar
        {-0.08, 0.12, 0.0},   // right collar
        {0.0, 0.21, 0.0},     // head
        {0.1, 0.02, 0.0},     // left shoulder
        {-0.1, 0.02, 0.0},    // right shoulder
        {0.26, 0.0, 0.0},     // left elbow
        {-0.26, 0.0, 0.0},    // right elbow
        {0.25, 0.0, 0.0},     // left wrist
        {-0.25, 0.0, 0.0},    // right wrist
        {0.08, 0.0, 0.0},     // left hand
        {-0.08, 0.0, 0.0},    // right hand
    };

    // Synthetic shape directions: componentwise masks of the rest offset, so
    // the basis inherits the offsets' bilateral symmetry.
    std::vector<Eigen::Matrix<double, 3, kShapeCoeffCount>> basis(kSmplJointCount);
    for (int j = 0; j < kSmplJointCount; ++j) {
        const Eigen::Vector3d& o = s.rest_offsets[static_cast<size_t>(j)];
        auto& b = basis[static_cast<size_t>(j)];
        b.setZero();
        b.col(0) = 0.10 * o;                                    // overall size
        b.col(1) = 0.12 * Eigen::Vector3d(0.0, o.y(), 0.0);     // height
        b.col(2) = 0.08 * Eigen::Vector3d(o.x(), 0.0, 0.0);     // span
        b.col(3) = 0.06 * Eigen::Vector3d(0.0, 0.0, o.z());     // depth
        b.col(4) = 0.03 * Eigen::Vector3d(o.x(), o.y(), 0.0);
        b.col(5) = 0.03 * Eigen::Vector3d(0.0, o.y(), o.z());
        b.col(6) = 0.02 * Eigen::Vector3d(o.x(), 0.0, o.z());
        b.col(7) = 0.02 * o;
        b.col(8) = 0.01 * Eigen::Vector3d(0.0, o.y(), 0.0);
        b.col(9) = 0.01 * o;
    }
    s.shape_basis = std::move(basis);

    s.validate();
    return s;
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int parse_int(const std::string& tok, const std::string& field) {
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError("skeleton field '" + field + "': bad integer '" + tok + "'");
    }
}

double parse_real(const std::string& tok, const std::string& field) {
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError("skeleton field '" + field + "': bad real '" + tok + "'");
    }
}

// Reads `count` whitespace-separated reals per row for `rows` rows.
std::vector<std::vector<double>> read_rows(std::istream& in, int rows, int count,
                                           const std::string& field) {
    std::vector<std::vector<double>> out;
    std::string line;
    while (static_cast<int>(out.size()) < rows && std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) row.push_back(parse_real(tok, field));
        if (static_cast<int>(row.size()) != count)
            throw DataError("skeleton field '" + field + "': row " +
                            std::to_string(out.size()) + " has " +
                            std::to_string(row.size()) + " values, expected " +
                            std::to_string(count));
        out.push_back(std::move(row));
    }
    if (static_cast<int>(out.size()) != rows)
        throw DataError("skeleton field '" + field + "': expected " + std::to_string(rows) +
                        " rows, got " + std::to_string(out.size()));
    return out;
}

}  // namespace

Skeleton load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open skeleton file: " + path);

    Skeleton s;
    bool saw_count = false, saw_parents = false, saw_mirror = false, saw_offsets = false;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string rest;
        std::getline(ls, rest);

        if (key == "joint_count") {
            if (saw_count) throw DataError("skeleton field 'joint_count' appears twice");
            s.joint_count = parse_int(split_commas(rest).at(0), "joint_count");
            if (s.joint_count < 1)
                throw DataError("skeleton field 'joint_count': must be >= 1, got " +
                                std::to_string(s.joint_count));
            saw_count = true;
        } else if (key == "parents") {
            if (!saw_count) throw DataError("skeleton field 'parents' before 'joint_count'");
            if (saw_parents) throw DataError("skeleton field 'parents' appears twice");
            for (const auto& tok : split_commas(rest))
                s.parents.push_back(parse_int(tok, "parents"));
            if (static_cast<int>(s.parents.size()) != s.joint_count)
                throw DataError("skeleton field 'parents': expected " +
                                std::to_string(s.joint_count) + " entries, got " +
                                std::to_string(s.parents.size()));
            saw_parents = true;
        } else if (key == "mirror") {
            if (!saw_count) throw DataError("skeleton field 'mirror' before 'joint_count'");
            if (saw_mirror) throw DataError("skeleton field 'mirror' appears twice");
            for (const auto& tok : split_commas(rest))
                s.mirror_map.push_back(parse_int(tok, "mirror"));
            if (static_cast<int>(s.mirror_map.size()) != s.joint_count)
                throw DataError("skeleton field 'mirror': expected " +
                                std::to_string(s.joint_count) + " entries, got " +
                                std::to_string(s.mirror_map.size()));
            saw_mirror = true;
        } else if (key == "offsets") {
            if (!saw_count) throw DataError("skeleton field 'offsets' before 'joint_count'");
            if (saw_offsets) throw DataError("skeleton field 'offsets' appears twice");
            for (auto& row : read_rows(in, s.joint_count, 3, "offsets"))
                s.rest_offsets.emplace_back(row[0], row[1], row[2]);
            saw_offsets = true;
        } else if (key == "shape_basis") {
            if (!saw_count) throw DataError("skeleton field 'shape_basis' before 'joint_count'");
            if (s.shape_basis) throw DataError("skeleton field 'shape_basis' appears twice");
            std::vector<Eigen::Matrix<double, 3, kShapeCoeffCount>> basis;
            for (auto& row : read_rows(in, s.joint_count, 3 * kShapeCoeffCount, "shape_basis")) {
                Eigen::Matrix<double, 3, kShapeCoeffCount> b;
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < kShapeCoeffCount; ++c)
                        b(r, c) = row[static_cast<size_t>(r * kShapeCoeffCount + c)];
                basis.push_back(b);
            }
            s.shape_basis = std::move(basis);
        } else {
            throw DataError("skeleton file has unknown field '" + key + "'");
        }
    }

    if (!saw_count) throw DataError("skeleton file is missing field 'joint_count'");
    if (!saw_parents) throw DataError("skeleton file is missing field 'parents'");
    if (!saw_mirror) throw DataError("skeleton file is missing field 'mirror'");
    if (!saw_offsets) throw DataError("skeleton file is missing field 'offsets'");

    s.validate();
    return s;
}

void save_skeleton(const std::string& path, const Skeleton& skel) {
    skel.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot open skeleton file for writing: " + path);

    out << "joint_count " << skel.joint_count << "\n";
    out << "parents ";
    for (size_t j = 0; j < skel.parents.size(); ++j)
        out << (j ? "," : "") << skel.parents[j];
    out << "\nmirror ";
    for (size_t j = 0; j < skel.mirror_map.size(); ++j)
        out << (j ? "," : "") << skel.mirror_map[j];
    out << "\noffsets\n";
    for (const auto& o : skel.rest_offsets)
        out << fmt_double(o.x()) << " " << fmt_double(o.y()) << " " << fmt_double(o.z())
            << "\n";
    if (skel.shape_basis) {
        out << "shape_basis\n";
        for (const auto& b : *skel.shape_basis) {
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < kShapeCoeffCount; ++c)
                    out << (r + c ? " " : "") << fmt_double(b(r, c));
            out << "\n";
        }
    }
    if (!out) throw DataError("failed writing skeleton file: " + path);
}

JointPositions forward_kinematics(const Skeleton& skel, const PoseFrame& frame) {
    if (frame.joint_count() != skel.joint_count)
        throw DataError("pose frame has " + std::to_string(frame.joint_count()) +
                        " rotations, skeleton expects " + std::to_string(skel.joint_count));
    if (frame.betas && !skel.shape_basis)
        throw DataError("pose frame carries shape coefficients but skeleton has no shape basis");

    const int n = skel.joint_count;
    std::vector<Eigen::Matrix3d> global(static_cast<size_t>(n));
    JointPositions pos(n, 3);

    global[0] = matrix_from_quaternion(quaternion_from_axis_angle(frame.rotations[0]));
    pos.row(0) = frame.root_translation.value_or(Eigen::Vector3d::Zero()).transpose();
    for (int j = 1; j < n; ++j) {
        const int p = skel.parents[static_cast<size_t>(j)];
        const Eigen::Matrix3d local =
            matrix_from_quaternion(quaternion_from_axis_angle(frame.rotations[static_cast<size_t>(j)]));
        global[static_cast<size_t>(j)] = global[static_cast<size_t>(p)] * local;
        pos.row(j) = pos.row(p) +
                     (global[static_cast<size_t>(p)] * skel.shaped_offset(j, frame.betas))
                         .transpose();
    }
    return pos;
}

JointSequence fk_sequence(const Skeleton& skel, const MotionSequence& seq) {
    validate_sequence(seq);
    JointSequence out;
    out.fps = seq.fps;
    out.frames.reserve(seq.frames.size());
    for (const auto& f : seq.frames) out.frames.push_back(forward_kinematics(skel, f));
    return out;
}

JointPositions2d project_weak_perspective(const JointPositions& joints,
                                          const WeakPerspectiveCamera& cam) {
    cam.validate();
    if (!joints.allFinite()) throw DataError("projection input joints are not finite");
    JointPositions2d out(joints.rows(), 2);
    out.col(0) = cam.scale * joints.col(0).array() + cam.t_x;
    out.col(1) = cam.scale * joints.col(1).array() + cam.t_y;
    return out;
}

}  // namespace mvkit
