#ifndef PASSBIO_RECORD_HPP
#define PASSBIO_RECORD_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "tpe/error.hpp"
#include "tpe/scheme.hpp"

namespace passbio {

using tpe::Bytes;

class DuplicateId : public tpe::Error {
public:
    using tpe::Error::Error;
};

class StorageFailure : public tpe::Error {
public:
    using tpe::Error::Error;
};

// Token whose digest or dimension does not fit the enrolled record.
class MalformedToken : public tpe::Error {
public:
    using tpe::Error::Error;
};

// ERR frame from the peer.
class RemoteError : public tpe::Error {
public:
    using tpe::Error::Error;
};

inline constexpr std::size_t kMaxIdBytes = 256;

// Ids are opaque: non-empty, at most kMaxIdBytes. Throws InvalidParameter.
void validate_id(std::string_view id);

struct EnrollmentRecord {
    std::string id;
    tpe::MetricKind metric = tpe::MetricKind::EuclideanSquared;
    // Seconds since the Unix epoch, assigned by the server.
    std::int64_t enrolled_at = 0;
    tpe::Ciphertext ciphertext;

    friend bool operator==(const EnrollmentRecord&, const EnrollmentRecord&) = default;
};

enum class PutMode : std::uint8_t {
    Insert = 0,    // fails with DuplicateId if the id exists
    Append = 1,    // adds another template under the id
    Overwrite = 2, // replaces every template under the id
};

PutMode put_mode_from_byte(std::uint8_t b);

struct AuthRequest {
    std::string id;
    tpe::Token token;
};

enum class Outcome : std::uint8_t {
    Denied = 0,
    Authenticated = 1,
};

struct AuthResult {
    Outcome outcome = Outcome::Denied;
};

const char* to_string(Outcome o);

} // namespace passbio

#endif // PASSBIO_RECORD_HPP
