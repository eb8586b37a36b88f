#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>

#include "mvkit/error.hpp"

// Raw little-endian binary file access with byte-offset diagnostics.
// Multi-byte values are written in host order; every supported target is
// little-endian.

namespace mvkit::detail {

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path)
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot open file for writing: " + path);
    }

    void raw(const void* data, size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out_) throw DataError("write failed at byte " + std::to_string(offset_) +
                                   ": " + path_);
        offset_ += n;
    }

    void u16(uint16_t v) { raw(&v, sizeof v); }
    void u32(uint32_t v) { raw(&v, sizeof v); }
    void u64(uint64_t v) { raw(&v, sizeof v); }
    void i32(int32_t v) { raw(&v, sizeof v); }
    void i64(int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void bytes(const std::string& s) { raw(s.data(), s.size()); }

    size_t offset() const { return offset_; }

private:
    std::string path_;
    std::ofstream out_;
    size_t offset_ = 0;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw DataError("cannot open file: " + path);
    }

    void raw(void* data, size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n)
            throw DataError("file truncated at byte " +
                            std::to_string(offset_ + static_cast<size_t>(in_.gcount())) +
                            ": " + path_);
        offset_ += n;
    }

    uint16_t u16() { uint16_t v; raw(&v, sizeof v); return v; }
    uint32_t u32() { uint32_t v; raw(&v, sizeof v); return v; }
    uint64_t u64() { uint64_t v; raw(&v, sizeof v); return v; }
    int32_t i32() { int32_t v; raw(&v, sizeof v); return v; }
    int64_t i64() { int64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    std::string bytes(size_t n) {
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

    bool at_eof() { return in_.peek() == std::ifstream::traits_type::eof(); }
    size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    size_t offset_ = 0;
};

}  // namespace mvkit::detail
