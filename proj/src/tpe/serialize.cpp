#include "tpe/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "tpe/error.hpp"

namespace tpe {

void ByteWriter::u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
}

void ByteWriter::u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
}

void ByteWriter::magic(std::string_view tag) {
    out_.insert(out_.end(), tag.begin(), tag.end());
}

void ByteWriter::blob(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > 0xFFFFFFFFu) {
        throw FormatError("blob too large for a 32-bit length prefix");
    }
    u32(static_cast<std::uint32_t>(bytes.size()));
    raw(bytes);
}

void ByteWriter::str(std::string_view s) {
    blob(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void ByteWriter::integer(const exact::Integer& v) {
    blob(encode_integer(v));
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
    if (n > remaining()) {
        throw FormatError("unexpected end of data");
    }
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
    auto b = raw(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::uint64_t ByteReader::u64() {
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto byte : b) {
        v = (v << 8) | byte;
    }
    return v;
}

void ByteReader::expect_magic(std::string_view tag) {
    auto b = raw(tag.size());
    if (!std::equal(b.begin(), b.end(), tag.begin(), tag.end(),
                    [](std::uint8_t x, char c) { return x == static_cast<std::uint8_t>(c); })) {
        throw FormatError("bad magic, expected " + std::string(tag));
    }
}

std::span<const std::uint8_t> ByteReader::blob() {
    const std::uint32_t n = u32();
    return raw(n);
}

std::string ByteReader::str() {
    auto b = blob();
    return std::string(b.begin(), b.end());
}

exact::Integer ByteReader::integer() { return decode_integer(blob()); }

void ByteReader::expect_end() const {
    if (!at_end()) {
        throw FormatError("trailing bytes after payload");
    }
}

// --- Integers -------------------------------------------------------------

Bytes encode_integer(const exact::Integer& v) {
    const int sign = sgn(v);
    if (sign == 0) {
        return Bytes{0x00};
    }
    exact::Integer magnitude = abs(v);
    if (sign > 0) {
        Bytes out((mpz_sizeinbase(magnitude.get_mpz_t(), 2) + 7) / 8);
        std::size_t count = 0;
        mpz_export(out.data(), &count, 1, 1, 1, 0, magnitude.get_mpz_t());
        out.resize(count);
        if (out[0] & 0x80) {
            out.insert(out.begin(), 0x00);
        }
        return out;
    }
    // Smallest k with |v| <= 2^(8k-1); encode 2^(8k) - |v| in k bytes.
    std::size_t k = 1;
    exact::Integer limit = 128;
    while (magnitude > limit) {
        ++k;
        limit <<= 8;
    }
    exact::Integer wrapped = (exact::Integer(1) << static_cast<mp_bitcnt_t>(8 * k)) - magnitude;
    Bytes out(k, 0x00);
    std::size_t count = 0;
    Bytes tmp((mpz_sizeinbase(wrapped.get_mpz_t(), 2) + 7) / 8);
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, wrapped.get_mpz_t());
    std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(count), out.end() - static_cast<std::ptrdiff_t>(count));
    return out;
}

exact::Integer decode_integer(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) {
        throw FormatError("empty integer encoding");
    }
    exact::Integer v;
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    if (bytes[0] & 0x80) {
        v -= exact::Integer(1) << static_cast<mp_bitcnt_t>(8 * bytes.size());
    }
    return v;
}

// --- Matrices and permutations --------------------------------------------

void write_matrix(ByteWriter& w, const exact::Matrix& m) {
    w.magic("TPEM");
    w.u8(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    exact::Integer g, num, den;
    for (const auto& e : m.numerators()) {
        mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), m.denominator().get_mpz_t());
        mpz_divexact(num.get_mpz_t(), e.get_mpz_t(), g.get_mpz_t());
        mpz_divexact(den.get_mpz_t(), m.denominator().get_mpz_t(), g.get_mpz_t());
        w.integer(num);
        w.integer(den);
    }
}

exact::Matrix read_matrix(ByteReader& r) {
    r.expect_magic("TPEM");
    if (r.u8() != kFormatVersion) {
        throw FormatError("unsupported matrix format version");
    }
    const std::uint64_t rows = r.u32();
    const std::uint64_t cols = r.u32();
    if (rows == 0 || cols == 0) {
        throw FormatError("matrix with a zero dimension");
    }
    // Each entry needs at least 10 bytes; reject headers the payload cannot back.
    if (rows * cols > r.remaining() / 10) {
        throw FormatError("matrix header larger than payload");
    }
    std::vector<exact::Scalar> entries(rows * cols);
    for (auto& e : entries) {
        exact::Integer num = r.integer();
        exact::Integer den = r.integer();
        if (den <= 0) {
            throw FormatError("matrix entry with non-positive denominator");
        }
        e = exact::Scalar(num, den);
        e.canonicalize();
    }
    return exact::Matrix::from_scalars(rows, cols, entries);
}

void write_permutation(ByteWriter& w, const exact::Permutation& p) {
    w.u32(static_cast<std::uint32_t>(p.size()));
    for (std::size_t v : p.mapping()) {
        w.u32(static_cast<std::uint32_t>(v));
    }
}

exact::Permutation read_permutation(ByteReader& r) {
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 4) {
        throw FormatError("permutation header larger than payload");
    }
    std::vector<std::size_t> m(n);
    for (auto& v : m) {
        v = r.u32();
    }
    try {
        return exact::Permutation(std::move(m));
    } catch (const InvalidParameter& e) {
        throw FormatError(e.what());
    }
}

Bytes serialize_matrix(const exact::Matrix& m) {
    ByteWriter w;
    write_matrix(w, m);
    return w.take();
}

exact::Matrix deserialize_matrix(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    auto m = read_matrix(r);
    r.expect_end();
    return m;
}

// --- Files ----------------------------------------------------------------

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error("short write to " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace tpe
