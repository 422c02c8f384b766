#ifndef PASSBIO_CLIENT_HPP
#define PASSBIO_CLIENT_HPP

#include <string>

#include "passbio/wire.hpp"

namespace passbio {

// Synchronous client; one request in flight. ERR replies throw RemoteError.
class Client {
public:
    explicit Client(const std::string& address);

    void ping();
    void enroll(const std::string& id, tpe::MetricKind metric, const tpe::Ciphertext& ct,
                PutMode mode = PutMode::Insert);
    Outcome authenticate(const std::string& id, const tpe::Token& token);

    // Sends raw token bytes; lets tests exercise malformed payloads.
    Outcome authenticate_raw(const std::string& id, const Bytes& token_bytes);

private:
    Frame round_trip(const Frame& request, MsgType expected);

    Connection conn_;
};

} // namespace passbio

#endif // PASSBIO_CLIENT_HPP
