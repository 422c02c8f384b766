#ifndef PASSBIO_SERVICE_HPP
#define PASSBIO_SERVICE_HPP

#include <memory>

#include <spdlog/logger.h>

#include "passbio/record.hpp"
#include "passbio/store.hpp"

namespace passbio {

// Server-side logic. Holds ciphertexts only; sees the match bit and
// nothing else about a query.
class Service {
public:
    // A null logger uses spdlog's default logger.
    explicit Service(Store& store, std::shared_ptr<spdlog::logger> log = nullptr);

    // enrolled_at is set here. Throws DuplicateId, StorageFailure, or
    // InvalidParameter for a bad id or a non-square ciphertext.
    void enroll(const std::string& id, tpe::MetricKind metric, tpe::Ciphertext ciphertext, PutMode mode);

    // Unknown ids and mismatched tokens are Denied; any matching record of
    // the id authenticates.
    AuthResult authenticate(const AuthRequest& req) const;

    // A token that did not decode; recorded the same way as a mismatch.
    AuthResult reject_malformed(const std::string& id, const std::string& reason) const;

    Store& store() { return store_; }
    spdlog::logger& log() const { return *log_; }

private:
    Store& store_;
    std::shared_ptr<spdlog::logger> log_;
};

} // namespace passbio

#endif // PASSBIO_SERVICE_HPP
