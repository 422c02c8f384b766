#ifndef PASSBIO_WIRE_HPP
#define PASSBIO_WIRE_HPP

// Framing: u32 big-endian length of (type byte + payload), the type byte,
// then the payload.
//
//   ENROLL  id (u32 len + bytes), metric byte, ciphertext blob,
//           optional trailing put-mode byte (default Insert)
//   AUTH    id (u32 len + bytes), token blob
//   PING    empty
//   ACK     empty
//   RESULT  1 byte: 0 Denied, 1 Authenticated
//   PONG    empty
//   ERR     UTF-8 message

#include <cstdint>
#include <optional>
#include <string>

#include "passbio/record.hpp"

namespace passbio {

enum class MsgType : std::uint8_t {
    Enroll = 0x01,
    Auth = 0x02,
    Ping = 0x03,
    Ack = 0x81,
    Result = 0x82,
    Pong = 0x83,
    Err = 0xFF,
};

inline constexpr std::size_t kDefaultMaxFrame = std::size_t{1} << 30;

struct Frame {
    MsgType type = MsgType::Ping;
    Bytes payload;
};

bool known_type(std::uint8_t b);

Bytes encode_frame(const Frame& f);

// Owns a connected stream socket.
class Connection {
public:
    explicit Connection(int fd) : fd_(fd) {}
    ~Connection();
    Connection(Connection&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Connection& operator=(Connection&& other) noexcept;
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    int fd() const { return fd_; }

    void send(const Frame& f);
    // nullopt on a clean close before the first length byte. Throws
    // FormatError on an oversized, empty or truncated frame or an unknown
    // type, and tpe::Error on socket errors.
    std::optional<Frame> receive(std::size_t max_frame = kDefaultMaxFrame);

    void shutdown();

private:
    // false on EOF before any byte of `len`.
    bool read_exact(std::uint8_t* out, std::size_t len);

    int fd_ = -1;
};

// "host:port"; throws InvalidParameter when malformed.
std::pair<std::string, std::uint16_t> split_host_port(const std::string& address);
Connection connect_to(const std::string& address);

struct EnrollMessage {
    std::string id;
    tpe::MetricKind metric = tpe::MetricKind::EuclideanSquared;
    Bytes ciphertext;
    PutMode mode = PutMode::Insert;
};

struct AuthMessage {
    std::string id;
    Bytes token;
};

Bytes encode_enroll(const EnrollMessage& m);
EnrollMessage decode_enroll(std::span<const std::uint8_t> payload);
Bytes encode_auth(const AuthMessage& m);
AuthMessage decode_auth(std::span<const std::uint8_t> payload);
Bytes encode_result(Outcome o);
Outcome decode_result(std::span<const std::uint8_t> payload);

} // namespace passbio

#endif // PASSBIO_WIRE_HPP
