#ifndef PASSBIO_STORE_HPP
#define PASSBIO_STORE_HPP

// Append-only enrollment log with an in-memory index rebuilt on open.
//
// File: "PBST", version byte, then records of
//   [u32 body length][body][u32 crc32(body)]
// body: put mode byte, id (u32 length + bytes), metric byte,
//       enrolled_at (i64), ciphertext blob (u32 length + "TPEC" encoding).
// A torn or corrupt tail left by a crash is truncated on open.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "passbio/record.hpp"

namespace passbio {

using RecordPtr = std::shared_ptr<const EnrollmentRecord>;

class Store {
public:
    // Creates the file if missing. Throws StorageFailure on I/O errors and
    // FormatError on a foreign file.
    explicit Store(std::filesystem::path path);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Durable (fsync) before returning. One writer at a time; readers are
    // not blocked during the write itself.
    void put(const EnrollmentRecord& record, PutMode mode);

    // Records under `id` in enrollment order; empty if unknown.
    std::vector<RecordPtr> get(const std::string& id) const;

    std::size_t id_count() const;
    std::size_t record_count() const;
    std::vector<std::string> ids() const;

    // Bytes dropped from a torn tail when the log was opened.
    std::size_t truncated_bytes() const { return truncated_bytes_; }
    const std::filesystem::path& path() const { return path_; }

private:
    void replay();
    void apply(RecordPtr record, PutMode mode);

    std::filesystem::path path_;
    int fd_ = -1;
    std::size_t truncated_bytes_ = 0;

    std::mutex writer_;
    mutable std::shared_mutex index_mutex_;
    std::unordered_map<std::string, std::vector<RecordPtr>> index_;
    std::size_t records_ = 0;
};

} // namespace passbio

#endif // PASSBIO_STORE_HPP
