#include "passbio/server.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

namespace passbio {

namespace {

Frame error_frame(const std::string& message) {
    return Frame{MsgType::Err, Bytes(message.begin(), message.end())};
}

} // namespace

Server::Server(Service& service, const std::string& bind_address, std::size_t max_frame)
    : service_(service), max_frame_(max_frame) {
    auto [host, port] = split_host_port(bind_address);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service_name = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service_name.c_str(), &hints, &res); rc != 0) {
        throw tpe::Error("resolve " + bind_address + ": " + ::gai_strerror(rc));
    }
    int last_errno = 0;
    for (addrinfo* ai = res; ai != nullptr && listen_fd_ < 0; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            listen_fd_ = fd;
        } else {
            last_errno = errno;
            ::close(fd);
        }
    }
    ::freeaddrinfo(res);
    if (listen_fd_ < 0) {
        throw tpe::Error("bind " + bind_address + ": " + std::strerror(last_errno));
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    if (addr.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    }
    if (::pipe2(wake_pipe_, O_CLOEXEC) != 0) {
        ::close(listen_fd_);
        throw tpe::Error(std::string("pipe: ") + std::strerror(errno));
    }
}

Server::~Server() {
    stop();
    for (int fd : {listen_fd_, wake_pipe_[0], wake_pipe_[1]}) {
        if (fd >= 0) {
            ::close(fd);
        }
    }
}

void Server::start() {
    runner_ = std::thread([this] { run(); });
}

void Server::run() {
    service_.log().info("listening on port {}", port_);
    while (!stopping_) {
        pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
        if (::poll(fds, 2, 1000) < 0) {
            if (errno == EINTR) {
                continue;
            }
            service_.log().error("poll: {}", std::strerror(errno));
            break;
        }
        reap(false);
        if (stopping_ || (fds[1].revents & POLLIN)) {
            break;
        }
        if (!(fds[0].revents & POLLIN)) {
            continue;
        }
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno != EINTR && errno != EAGAIN && errno != ECONNABORTED) {
                service_.log().warn("accept: {}", std::strerror(errno));
            }
            continue;
        }
        std::lock_guard lock(workers_mutex_);
        auto& w = workers_.emplace_back();
        w.fd = fd;
        w.thread = std::thread([this, &w, fd] {
            Connection conn(fd);
            handle(conn);
            // Set under the lock so stop() never shuts down a reused fd.
            std::lock_guard done_lock(workers_mutex_);
            w.done = true;
        });
    }
}

void Server::stop() {
    if (stopping_.exchange(true)) {
        if (runner_.joinable()) {
            runner_.join();
        }
        return;
    }
    if (wake_pipe_[1] >= 0) {
        const char b = 1;
        [[maybe_unused]] auto n = ::write(wake_pipe_[1], &b, 1);
    }
    if (runner_.joinable()) {
        runner_.join();
    }
    {
        std::lock_guard lock(workers_mutex_);
        for (auto& w : workers_) {
            if (!w.done) {
                ::shutdown(w.fd, SHUT_RDWR);
            }
        }
    }
    reap(true);
}

void Server::reap(bool all) {
    std::list<Worker> finished;
    {
        std::lock_guard lock(workers_mutex_);
        for (auto it = workers_.begin(); it != workers_.end();) {
            auto next = std::next(it);
            if (all || it->done) {
                finished.splice(finished.end(), workers_, it);
            }
            it = next;
        }
    }
    for (auto& w : finished) {
        w.thread.join();
    }
}

void Server::handle(Connection& conn) {
    try {
        while (true) {
            std::optional<Frame> request;
            try {
                request = conn.receive(max_frame_);
            } catch (const tpe::FormatError& e) {
                service_.log().warn("closing connection: {}", e.what());
                conn.send(error_frame(e.what()));
                return;
            }
            if (!request) {
                return;
            }
            conn.send(dispatch(*request));
        }
    } catch (const std::exception& e) {
        service_.log().warn("connection error: {}", e.what());
    }
}

Frame Server::dispatch(const Frame& request) {
    switch (request.type) {
    case MsgType::Ping: return Frame{MsgType::Pong, {}};
    case MsgType::Enroll: {
        try {
            auto m = decode_enroll(request.payload);
            service_.enroll(m.id, m.metric, tpe::deserialize_ciphertext(m.ciphertext), m.mode);
            return Frame{MsgType::Ack, {}};
        } catch (const DuplicateId&) {
            return error_frame("id already enrolled");
        } catch (const tpe::FormatError& e) {
            return error_frame(std::string("bad enroll request: ") + e.what());
        } catch (const tpe::InvalidParameter& e) {
            return error_frame(std::string("bad enroll request: ") + e.what());
        } catch (const StorageFailure& e) {
            service_.log().error("storage failure: {}", e.what());
            return error_frame("storage failure");
        }
    }
    case MsgType::Auth: {
        AuthMessage m;
        try {
            m = decode_auth(request.payload);
        } catch (const tpe::FormatError& e) {
            return error_frame(std::string("bad auth request: ") + e.what());
        }
        AuthResult result;
        try {
            result = service_.authenticate(AuthRequest{m.id, tpe::deserialize_token(m.token)});
        } catch (const tpe::FormatError& e) {
            result = service_.reject_malformed(m.id, e.what());
        }
        return Frame{MsgType::Result, encode_result(result.outcome)};
    }
    default: return error_frame("unexpected message type");
    }
}

} // namespace passbio
