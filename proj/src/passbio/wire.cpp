#include "passbio/wire.hpp"

#include <cerrno>
#include <cstring>

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include "tpe/serialize.hpp"

namespace passbio {

bool known_type(std::uint8_t b) {
    switch (static_cast<MsgType>(b)) {
    case MsgType::Enroll:
    case MsgType::Auth:
    case MsgType::Ping:
    case MsgType::Ack:
    case MsgType::Result:
    case MsgType::Pong:
    case MsgType::Err: return true;
    }
    return false;
}

Bytes encode_frame(const Frame& f) {
    if (f.payload.size() + 1 > 0xFFFFFFFFu) {
        throw tpe::FormatError("frame too large");
    }
    tpe::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(f.payload.size() + 1));
    w.u8(static_cast<std::uint8_t>(f.type));
    w.raw(f.payload);
    return w.take();
}

// --- Connection -----------------------------------------------------------

Connection::~Connection() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

Connection& Connection::operator=(Connection&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void Connection::send(const Frame& f) {
    const Bytes bytes = encode_frame(f);
    std::size_t done = 0;
    while (done < bytes.size()) {
        ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw tpe::Error(std::string("send: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

bool Connection::read_exact(std::uint8_t* out, std::size_t len) {
    std::size_t done = 0;
    while (done < len) {
        ssize_t n = ::recv(fd_, out + done, len - done, 0);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw tpe::Error(std::string("recv: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (done == 0) {
                return false;
            }
            throw tpe::FormatError("connection closed mid-frame");
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<Frame> Connection::receive(std::size_t max_frame) {
    std::uint8_t header[4];
    if (!read_exact(header, 4)) {
        return std::nullopt;
    }
    const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                              (std::uint32_t{header[2]} << 8) | header[3];
    if (len == 0) {
        throw tpe::FormatError("empty frame");
    }
    if (len > max_frame) {
        throw tpe::FormatError("frame of " + std::to_string(len) + " bytes exceeds limit");
    }
    std::uint8_t type = 0;
    if (!read_exact(&type, 1)) {
        throw tpe::FormatError("connection closed mid-frame");
    }
    if (!known_type(type)) {
        throw tpe::FormatError("unknown frame type " + std::to_string(type));
    }
    Frame f{static_cast<MsgType>(type), Bytes(len - 1)};
    if (!f.payload.empty() && !read_exact(f.payload.data(), f.payload.size())) {
        throw tpe::FormatError("connection closed mid-frame");
    }
    return f;
}

void Connection::shutdown() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
    }
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size()) {
        throw tpe::InvalidParameter("expected HOST:PORT, got '" + address + "'");
    }
    std::string host = address.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
        host = host.substr(1, host.size() - 2);
    }
    unsigned long port = 0;
    try {
        std::size_t used = 0;
        port = std::stoul(address.substr(colon + 1), &used);
        if (used != address.size() - colon - 1) {
            throw std::invalid_argument("trailing");
        }
    } catch (const std::exception&) {
        throw tpe::InvalidParameter("bad port in '" + address + "'");
    }
    if (port > 65535) {
        throw tpe::InvalidParameter("port out of range in '" + address + "'");
    }
    return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(port)};
}

Connection connect_to(const std::string& address) {
    auto [host, port] = split_host_port(address);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw tpe::Error("resolve " + address + ": " + ::gai_strerror(rc));
    }
    int last_errno = 0;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            ::freeaddrinfo(res);
            return Connection(fd);
        }
        last_errno = errno;
        ::close(fd);
    }
    ::freeaddrinfo(res);
    throw tpe::Error("connect " + address + ": " + std::strerror(last_errno));
}

// --- Payloads -------------------------------------------------------------

Bytes encode_enroll(const EnrollMessage& m) {
    tpe::ByteWriter w;
    w.str(m.id);
    w.u8(static_cast<std::uint8_t>(m.metric));
    w.blob(m.ciphertext);
    if (m.mode != PutMode::Insert) {
        w.u8(static_cast<std::uint8_t>(m.mode));
    }
    return w.take();
}

EnrollMessage decode_enroll(std::span<const std::uint8_t> payload) {
    tpe::ByteReader r(payload);
    EnrollMessage m;
    m.id = r.str();
    m.metric = tpe::metric_from_byte(r.u8());
    auto ct = r.blob();
    m.ciphertext.assign(ct.begin(), ct.end());
    if (!r.at_end()) {
        m.mode = put_mode_from_byte(r.u8());
    }
    r.expect_end();
    return m;
}

Bytes encode_auth(const AuthMessage& m) {
    tpe::ByteWriter w;
    w.str(m.id);
    w.blob(m.token);
    return w.take();
}

AuthMessage decode_auth(std::span<const std::uint8_t> payload) {
    tpe::ByteReader r(payload);
    AuthMessage m;
    m.id = r.str();
    auto t = r.blob();
    m.token.assign(t.begin(), t.end());
    r.expect_end();
    return m;
}

Bytes encode_result(Outcome o) { return Bytes{static_cast<std::uint8_t>(o)}; }

Outcome decode_result(std::span<const std::uint8_t> payload) {
    if (payload.size() != 1 || payload[0] > 1) {
        throw tpe::FormatError("bad RESULT payload");
    }
    return static_cast<Outcome>(payload[0]);
}

} // namespace passbio
