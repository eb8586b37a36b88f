#include "mvkit/motion_io.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

#include "binary_io.hpp"
#include "mvkit/error.hpp"

namespace mvkit {

namespace {

constexpr char kMotionMagic[4] = {'M', 'V', 'K', 'T'};
constexpr uint16_t kMotionVersion = 1;

constexpr uint8_t kFlagBetas = 1;
constexpr uint8_t kFlagTranslation = 2;

uint8_t repr_tag(RotationFormat repr) {
    switch (repr) {
        case RotationFormat::AxisAngle: return 0;
        case RotationFormat::Quaternion: return 1;
        case RotationFormat::SixD: return 2;
        case RotationFormat::Matrix: break;
    }
    throw DataError("matrix is not a motion file representation");
}

RotationFormat repr_from_tag(uint8_t tag, const std::string& path) {
    switch (tag) {
        case 0: return RotationFormat::AxisAngle;
        case 1: return RotationFormat::Quaternion;
        case 2: return RotationFormat::SixD;
        default:
            throw DataError("unknown rotation representation tag " + std::to_string(tag) +
                            ": " + path);
    }
}

// Encodes one rotation into `dim` doubles in the on-disk representation.
void encode_rotation(const Eigen::Vector3d& aa, RotationFormat repr, double* out) {
    switch (repr) {
        case RotationFormat::AxisAngle:
            out[0] = aa.x(); out[1] = aa.y(); out[2] = aa.z();
            return;
        case RotationFormat::Quaternion: {
            const Eigen::Vector4d q = quaternion_from_axis_angle(aa);
            for (int i = 0; i < 4; ++i) out[i] = q(i);
            return;
        }
        case RotationFormat::SixD: {
            const Vector6d v = sixd_encode(matrix_from_quaternion(quaternion_from_axis_angle(aa)));
            for (int i = 0; i < 6; ++i) out[i] = v(i);
            return;
        }
        case RotationFormat::Matrix: break;
    }
    throw DataError("matrix is not a motion file representation");
}

Eigen::Vector3d decode_rotation(const double* in, RotationFormat repr) {
    switch (repr) {
        case RotationFormat::AxisAngle: {
            const Eigen::Vector3d aa(in[0], in[1], in[2]);
            if (!aa.allFinite()) throw DataError("axis-angle rotation is not finite");
            return aa;
        }
        case RotationFormat::Quaternion: {
            const Eigen::Vector4d q(in[0], in[1], in[2], in[3]);
            return axis_angle_from_quaternion(canonical_quaternion(q));
        }
        case RotationFormat::SixD: {
            Vector6d v;
            for (int i = 0; i < 6; ++i) v(i) = in[i];
            return axis_angle_from_quaternion(quaternion_from_matrix(sixd_decode(v)));
        }
        case RotationFormat::Matrix: break;
    }
    throw DataError("matrix is not a motion file representation");
}

void write_binary(const std::string& path, const MotionSequence& seq, RotationFormat repr) {
    const int dim = rotation_dim(repr);
    const bool betas = seq.frames[0].betas.has_value();
    const bool trans = seq.frames[0].root_translation.has_value();

    detail::BinaryWriter out(path);
    out.raw(kMotionMagic, sizeof(kMotionMagic));
    out.u16(kMotionVersion);
    const uint8_t tag = repr_tag(repr);
    out.raw(&tag, 1);
    const uint8_t flags = (betas ? kFlagBetas : 0) | (trans ? kFlagTranslation : 0);
    out.raw(&flags, 1);
    out.u32(static_cast<uint32_t>(seq.joint_count()));
    out.u32(static_cast<uint32_t>(seq.frame_count()));
    out.f64(seq.fps);
    out.u32(static_cast<uint32_t>(seq.name.size()));
    out.bytes(seq.name);

    std::vector<double> scratch(static_cast<size_t>(dim));
    for (const auto& f : seq.frames) {
        for (const auto& aa : f.rotations) {
            encode_rotation(aa, repr, scratch.data());
            out.raw(scratch.data(), sizeof(double) * static_cast<size_t>(dim));
        }
        if (betas) out.raw(f.betas->data(), sizeof(double) * kShapeCoeffCount);
        if (trans) out.raw(f.root_translation->data(), sizeof(double) * 3);
    }
}

MotionSequence read_binary(const std::string& path) {
    detail::BinaryReader in(path);
    char magic[4];
    in.raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMotionMagic, sizeof(magic)) != 0)
        throw DataError("not a motion file (bad magic): " + path);
    const uint16_t version = in.u16();
    if (version != kMotionVersion)
        throw DataError("unsupported motion file version " + std::to_string(version) + ": " +
                        path);

    uint8_t tag = 0, flags = 0;
    in.raw(&tag, 1);
    in.raw(&flags, 1);
    const RotationFormat repr = repr_from_tag(tag, path);
    const int dim = rotation_dim(repr);
    const uint32_t joints = in.u32();
    const uint32_t frames = in.u32();
    const double fps = in.f64();
    const std::string name = in.bytes(in.u32());
    if (joints == 0) throw DataError("motion file has zero joint_count: " + path);
    if (frames == 0) throw DataError("motion file has zero frame_count: " + path);

    MotionSequence seq;
    seq.fps = fps;
    seq.name = name;
    seq.frames.reserve(frames);
    std::vector<double> scratch(static_cast<size_t>(dim));
    for (uint32_t t = 0; t < frames; ++t) {
        PoseFrame f;
        f.rotations.reserve(joints);
        for (uint32_t j = 0; j < joints; ++j) {
            in.raw(scratch.data(), sizeof(double) * static_cast<size_t>(dim));
            f.rotations.push_back(decode_rotation(scratch.data(), repr));
        }
        if (flags & kFlagBetas) {
            ShapeCoeffs b;
            in.raw(b.data(), sizeof(double) * kShapeCoeffCount);
            f.betas = b;
        }
        if (flags & kFlagTranslation) {
            Eigen::Vector3d tr;
            in.raw(tr.data(), sizeof(double) * 3);
            f.root_translation = tr;
        }
        seq.frames.push_back(std::move(f));
    }
    if (!in.at_eof())
        throw DataError("trailing bytes after frame payload at byte " +
                        std::to_string(in.offset()) + ": " + path);
    validate_sequence(seq);
    return seq;
}

nlohmann::json rotation_to_json(const Eigen::Vector3d& aa, RotationFormat repr) {
    double buf[6];
    encode_rotation(aa, repr, buf);
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < rotation_dim(repr); ++i) arr.push_back(buf[i]);
    return arr;
}

void write_json(const std::string& path, const MotionSequence& seq, RotationFormat repr) {
    nlohmann::json doc;
    doc["format"] = "mvkt";
    doc["version"] = kMotionVersion;
    doc["name"] = seq.name;
    doc["fps"] = seq.fps;
    doc["joint_count"] = seq.joint_count();
    doc["frame_count"] = seq.frame_count();
    repr_tag(repr);  // rejects matrix
    doc["representation"] = to_string(repr);
    doc["has_betas"] = seq.frames[0].betas.has_value();
    doc["has_root_translation"] = seq.frames[0].root_translation.has_value();

    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : seq.frames) {
        nlohmann::json jf;
        nlohmann::json rots = nlohmann::json::array();
        for (const auto& aa : f.rotations) rots.push_back(rotation_to_json(aa, repr));
        jf["rotations"] = std::move(rots);
        if (f.betas) {
            nlohmann::json b = nlohmann::json::array();
            for (int i = 0; i < kShapeCoeffCount; ++i) b.push_back((*f.betas)(i));
            jf["betas"] = std::move(b);
        }
        if (f.root_translation) {
            jf["root_translation"] = {f.root_translation->x(), f.root_translation->y(),
                                      f.root_translation->z()};
        }
        frames.push_back(std::move(jf));
    }
    doc["frames"] = std::move(frames);

    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

double json_number(const nlohmann::json& v, const std::string& field, const std::string& path) {
    if (!v.is_number())
        throw DataError("motion file field '" + field + "' is not a number: " + path);
    return v.get<double>();
}

MotionSequence read_json(const std::string& path, const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("motion file is not valid JSON: " + path + " (" + e.what() + ")");
    }

    auto require = [&](const char* field) -> const nlohmann::json& {
        if (!doc.contains(field))
            throw DataError(std::string("motion file is missing field '") + field +
                            "': " + path);
        return doc.at(field);
    };

    if (require("format").get<std::string>() != "mvkt")
        throw DataError("motion file field 'format' is not \"mvkt\": " + path);
    if (require("version").get<int>() != kMotionVersion)
        throw DataError("unsupported motion file version: " + path);
    const RotationFormat repr =
        rotation_format_from_string(require("representation").get<std::string>());
    if (repr == RotationFormat::Matrix)
        throw DataError("matrix is not a motion file representation: " + path);
    const int dim = rotation_dim(repr);

    MotionSequence seq;
    seq.name = require("name").get<std::string>();
    seq.fps = json_number(require("fps"), "fps", path);
    const auto joints = require("joint_count").get<int>();
    const auto frame_count = require("frame_count").get<int>();
    const bool betas = require("has_betas").get<bool>();
    const bool trans = require("has_root_translation").get<bool>();

    const auto& frames = require("frames");
    if (!frames.is_array() || static_cast<int>(frames.size()) != frame_count)
        throw DataError("motion file field 'frames' does not match frame_count: " + path);

    double buf[6];
    for (const auto& jf : frames) {
        PoseFrame f;
        const auto& rots = jf.at("rotations");
        if (static_cast<int>(rots.size()) != joints)
            throw DataError("motion file frame has wrong rotation count: " + path);
        for (const auto& r : rots) {
            if (static_cast<int>(r.size()) != dim)
                throw DataError("motion file rotation has " + std::to_string(r.size()) +
                                " components, representation needs " + std::to_string(dim) +
                                ": " + path);
            for (int i = 0; i < dim; ++i) buf[i] = json_number(r.at(static_cast<size_t>(i)), "rotations", path);
            f.rotations.push_back(decode_rotation(buf, repr));
        }
        if (betas) {
            const auto& b = jf.at("betas");
            if (static_cast<int>(b.size()) != kShapeCoeffCount)
                throw DataError("motion file frame betas must have 10 entries: " + path);
            ShapeCoeffs coeffs;
            for (int i = 0; i < kShapeCoeffCount; ++i)
                coeffs(i) = json_number(b.at(static_cast<size_t>(i)), "betas", path);
            f.betas = coeffs;
        }
        if (trans) {
            const auto& tr = jf.at("root_translation");
            if (tr.size() != 3)
                throw DataError("motion file root_translation must have 3 entries: " + path);
            f.root_translation = Eigen::Vector3d(json_number(tr.at(0), "root_translation", path),
                                                 json_number(tr.at(1), "root_translation", path),
                                                 json_number(tr.at(2), "root_translation", path));
        }
        seq.frames.push_back(std::move(f));
    }
    validate_sequence(seq);
    return seq;
}

}  // namespace

const char* to_string(MotionFileFormat f) {
    return f == MotionFileFormat::Binary ? "bin" : "json";
}

MotionFileFormat motion_file_format_from_string(std::string_view s) {
    if (s == "bin" || s == "binary") return MotionFileFormat::Binary;
    if (s == "json") return MotionFileFormat::Json;
    throw DataError("unknown motion file format: " + std::string(s));
}

void write_motion(const std::string& path, const MotionSequence& seq, MotionFileFormat format,
                  RotationFormat repr) {
    validate_sequence(seq);
    if (format == MotionFileFormat::Binary)
        write_binary(path, seq, repr);
    else
        write_json(path, seq, repr);
}

MotionSequence read_motion(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open file: " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, sizeof(magic));
    probe.close();
    if (std::memcmp(magic, kMotionMagic, sizeof(magic)) == 0) return read_binary(path);

    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_json(path, text);
}

}  // namespace mvkit
