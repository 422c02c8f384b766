#include "passbio/client.hpp"

namespace passbio {

Client::Client(const std::string& address) : conn_(connect_to(address)) {}

Frame Client::round_trip(const Frame& request, MsgType expected) {
    conn_.send(request);
    auto reply = conn_.receive();
    if (!reply) {
        throw tpe::Error("server closed the connection");
    }
    if (reply->type == MsgType::Err) {
        throw RemoteError(std::string(reply->payload.begin(), reply->payload.end()));
    }
    if (reply->type != expected) {
        throw tpe::FormatError("unexpected reply type");
    }
    return std::move(*reply);
}

void Client::ping() { round_trip(Frame{MsgType::Ping, {}}, MsgType::Pong); }

void Client::enroll(const std::string& id, tpe::MetricKind metric, const tpe::Ciphertext& ct, PutMode mode) {
    validate_id(id);
    EnrollMessage m{id, metric, tpe::serialize_ciphertext(ct), mode};
    round_trip(Frame{MsgType::Enroll, encode_enroll(m)}, MsgType::Ack);
}

Outcome Client::authenticate(const std::string& id, const tpe::Token& token) {
    return authenticate_raw(id, tpe::serialize_token(token));
}

Outcome Client::authenticate_raw(const std::string& id, const Bytes& token_bytes) {
    validate_id(id);
    auto reply = round_trip(Frame{MsgType::Auth, encode_auth(AuthMessage{id, token_bytes})}, MsgType::Result);
    return decode_result(reply.payload);
}

} // namespace passbio
