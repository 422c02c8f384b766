#ifndef PASSBIO_SERVER_HPP
#define PASSBIO_SERVER_HPP

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "passbio/service.hpp"
#include "passbio/wire.hpp"

namespace passbio {

// One thread per connection. Errors on a connection are answered with ERR
// and close that connection only.
class Server {
public:
    // Binds immediately; port 0 picks an ephemeral port.
    Server(Service& service, const std::string& bind_address, std::size_t max_frame = kDefaultMaxFrame);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const { return port_; }

    // Blocks until stop().
    void run();
    // run() on a background thread.
    void start();
    // Closes the listener and every open connection, then joins the threads.
    void stop();

private:
    struct Worker {
        std::thread thread;
        int fd = -1;
        std::atomic<bool> done{false};
    };

    void handle(Connection& conn);
    Frame dispatch(const Frame& request);
    void reap(bool all);

    Service& service_;
    std::size_t max_frame_;
    int listen_fd_ = -1;
    int wake_pipe_[2] = {-1, -1};
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread runner_;

    std::mutex workers_mutex_;
    std::list<Worker> workers_;
};

} // namespace passbio

#endif // PASSBIO_SERVER_HPP
