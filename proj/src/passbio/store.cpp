#include "passbio/store.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <spdlog/spdlog.h>

#include "tpe/serialize.hpp"

namespace passbio {

namespace {

constexpr std::string_view kMagic = "PBST";
constexpr std::size_t kHeaderBytes = 5;

[[noreturn]] void fail(const std::string& what, const std::filesystem::path& path) {
    throw StorageFailure(what + " " + path.string() + ": " + std::strerror(errno));
}

std::uint32_t crc_of(std::span<const std::uint8_t> body) {
    return static_cast<std::uint32_t>(crc32(0L, body.data(), static_cast<uInt>(body.size())));
}

void write_all(int fd, std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail("write", path);
        }
        done += static_cast<std::size_t>(n);
    }
}

Bytes encode_body(const EnrollmentRecord& r, PutMode mode) {
    tpe::ByteWriter w;
    w.u8(static_cast<std::uint8_t>(mode));
    w.str(r.id);
    w.u8(static_cast<std::uint8_t>(r.metric));
    w.i64(r.enrolled_at);
    w.blob(tpe::serialize_ciphertext(r.ciphertext));
    return w.take();
}

std::pair<EnrollmentRecord, PutMode> decode_body(std::span<const std::uint8_t> body) {
    tpe::ByteReader r(body);
    const PutMode mode = put_mode_from_byte(r.u8());
    std::string id = r.str();
    const tpe::MetricKind metric = tpe::metric_from_byte(r.u8());
    const std::int64_t enrolled_at = r.i64();
    EnrollmentRecord rec{std::move(id), metric, enrolled_at, tpe::deserialize_ciphertext(r.blob())};
    r.expect_end();
    return {std::move(rec), mode};
}

} // namespace

Store::Store(std::filesystem::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
    if (fd_ < 0) {
        fail("open", path_);
    }
    try {
        replay();
    } catch (...) {
        ::close(fd_);
        throw;
    }
}

Store::~Store() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void Store::replay() {
    const Bytes data = tpe::read_file(path_.string());
    if (data.empty()) {
        tpe::ByteWriter w;
        w.magic(kMagic);
        w.u8(tpe::kFormatVersion);
        write_all(fd_, w.bytes(), path_);
        if (::fsync(fd_) != 0) {
            fail("fsync", path_);
        }
        return;
    }
    if (data.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), data.begin()) ||
        data[4] != tpe::kFormatVersion) {
        throw tpe::FormatError("not a passbio store: " + path_.string());
    }

    std::size_t pos = kHeaderBytes;
    while (pos < data.size()) {
        std::span<const std::uint8_t> rest(data.data() + pos, data.size() - pos);
        if (rest.size() < 4) {
            break;
        }
        tpe::ByteReader r(rest);
        const std::uint32_t len = r.u32();
        if (static_cast<std::size_t>(len) + 8 > rest.size()) {
            break;
        }
        auto body = r.raw(len);
        if (r.u32() != crc_of(body)) {
            break;
        }
        try {
            auto [rec, mode] = decode_body(body);
            apply(std::make_shared<const EnrollmentRecord>(std::move(rec)), mode);
        } catch (const tpe::FormatError&) {
            break;
        }
        pos += static_cast<std::size_t>(len) + 8;
    }

    if (pos < data.size()) {
        truncated_bytes_ = data.size() - pos;
        spdlog::warn("store {}: dropping {} bytes of torn tail", path_.string(), truncated_bytes_);
        if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0 || ::fsync(fd_) != 0) {
            fail("truncate", path_);
        }
    }
    if (::lseek(fd_, 0, SEEK_END) < 0) {
        fail("seek", path_);
    }
}

void Store::apply(RecordPtr record, PutMode mode) {
    auto& slot = index_[record->id];
    if (mode == PutMode::Overwrite) {
        records_ -= slot.size();
        slot.clear();
    }
    slot.push_back(std::move(record));
    ++records_;
}

void Store::put(const EnrollmentRecord& record, PutMode mode) {
    validate_id(record.id);
    std::lock_guard writer(writer_);
    {
        std::shared_lock read(index_mutex_);
        const bool exists = index_.contains(record.id);
        if (mode == PutMode::Insert && exists) {
            throw DuplicateId("id already enrolled: " + record.id);
        }
    }

    const Bytes body = encode_body(record, mode);
    tpe::ByteWriter frame;
    frame.u32(static_cast<std::uint32_t>(body.size()));
    frame.raw(body);
    frame.u32(crc_of(body));
    const off_t start = ::lseek(fd_, 0, SEEK_END);
    try {
        write_all(fd_, frame.bytes(), path_);
        if (::fsync(fd_) != 0) {
            fail("fsync", path_);
        }
    } catch (...) {
        // Keep the log parseable: drop whatever part of the frame landed.
        if (start >= 0 && ::ftruncate(fd_, start) == 0) {
            ::lseek(fd_, start, SEEK_SET);
        }
        throw;
    }

    std::unique_lock write(index_mutex_);
    apply(std::make_shared<const EnrollmentRecord>(record), mode);
}

std::vector<RecordPtr> Store::get(const std::string& id) const {
    std::shared_lock read(index_mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) {
        return {};
    }
    return it->second;
}

std::size_t Store::id_count() const {
    std::shared_lock read(index_mutex_);
    return index_.size();
}

std::size_t Store::record_count() const {
    std::shared_lock read(index_mutex_);
    return records_;
}

std::vector<std::string> Store::ids() const {
    std::shared_lock read(index_mutex_);
    std::vector<std::string> out;
    out.reserve(index_.size());
    for (const auto& [id, _] : index_) {
        out.push_back(id);
    }
    return out;
}

} // namespace passbio
