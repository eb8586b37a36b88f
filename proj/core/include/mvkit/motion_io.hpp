#pragma once

#include <string>

#include "mvkit/motion.hpp"
#include "mvkit/rotation.hpp"

namespace mvkit {

enum class MotionFileFormat { Binary, Json };

const char* to_string(MotionFileFormat f);
MotionFileFormat motion_file_format_from_string(std::string_view s);

// Writes a motion file. Binary: magic "MVKT", version, header, f64 payload.
// JSON mirrors the same fields. On-disk rotation representation is
// axis_angle (canonical), quaternion or sixd; matrix is rejected. Payload
// values round-trip exactly in both formats.
void write_motion(const std::string& path, const MotionSequence& seq,
                  MotionFileFormat format = MotionFileFormat::Binary,
                  RotationFormat repr = RotationFormat::AxisAngle);

// Reads either format (sniffed from the leading bytes) and converts
// rotations to the in-memory axis-angle convention.
MotionSequence read_motion(const std::string& path);

}  // namespace mvkit
