#ifndef TPE_SERIALIZE_HPP
#define TPE_SERIALIZE_HPP

// Canonical binary encodings shared by every file and wire format.
//
// Integers: 4-byte big-endian length, then minimal big-endian two's
// complement bytes (zero is the single byte 0x00).
//
// Matrix ("TPEM"): magic, version byte, rows and cols as u32 big-endian,
// then the entries row-major, each as numerator then denominator in the
// integer encoding above, reduced to lowest terms.
//
// Permutation: u32 length, then each image as u32 big-endian.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpe/exact.hpp"

namespace tpe {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kFormatVersion = 1;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
    void magic(std::string_view tag);
    // u32 length followed by the bytes.
    void blob(std::span<const std::uint8_t> bytes);
    void str(std::string_view s);
    void integer(const exact::Integer& v);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

// Reads from a borrowed buffer; every accessor throws FormatError when the
// buffer is too short.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::span<const std::uint8_t> raw(std::size_t n);
    void expect_magic(std::string_view tag);
    std::span<const std::uint8_t> blob();
    std::string str();
    exact::Integer integer();

    std::size_t remaining() const { return in_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool at_end() const { return pos_ == in_.size(); }
    // Throws FormatError unless the whole buffer was consumed.
    void expect_end() const;

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

Bytes encode_integer(const exact::Integer& v);
exact::Integer decode_integer(std::span<const std::uint8_t> twos_complement);

void write_matrix(ByteWriter& w, const exact::Matrix& m);
exact::Matrix read_matrix(ByteReader& r);

void write_permutation(ByteWriter& w, const exact::Permutation& p);
exact::Permutation read_permutation(ByteReader& r);

Bytes serialize_matrix(const exact::Matrix& m);
exact::Matrix deserialize_matrix(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::string& path);
// Writes to a temporary sibling and renames it into place.
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace tpe

#endif // TPE_SERIALIZE_HPP
