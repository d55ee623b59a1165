#include <deig/cluster.hpp>
#include <deig/errors.hpp>
#include <deig/message.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>
#include <vector>

namespace deig {

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
    while (size > 0) {
        ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
        if (n <= 0) {
            throw WorkerUnreachableError("socket write failed");
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
}

bool read_all(int fd, std::uint8_t* data, std::size_t size) {
    while (size > 0) {
        ssize_t n = ::recv(fd, data, size, 0);
        if (n <= 0) return false;
        data += n;
        size -= static_cast<std::size_t>(n);
    }
    return true;
}

void write_frame(int fd, const Message& m) {
    auto bytes = serialize(m);
    write_all(fd, bytes.data(), bytes.size());
}

// Reads one frame; false on orderly EOF before the length field.
bool read_frame(int fd, Message& out) {
    std::uint32_t body;
    if (!read_all(fd, reinterpret_cast<std::uint8_t*>(&body), 4)) return false;
    if (body < 13 || body > (1u << 30)) {
        throw WorkerUnreachableError("corrupt frame length " + std::to_string(body));
    }
    std::vector<std::uint8_t> buf(body);
    if (!read_all(fd, buf.data(), body)) {
        throw WorkerUnreachableError("connection closed mid-frame");
    }
    out = deserialize(buf.data(), buf.size());
    return true;
}

// Runs one worker against its coordinator connection until end_session.
void worker_loop(Worker worker, int fd) {
    Message msg;
    while (read_frame(fd, msg)) {
        if (msg.kind == Kind::end_session) break;
        try {
            for (const Message& reply : worker.handle(msg)) {
                write_frame(fd, reply);
            }
        } catch (const std::exception&) {
            // Surface the failure as a frame so the coordinator throws on its
            // next read instead of deadlocking.
            try {
                write_frame(fd, Message::control(Kind::worker_error));
            } catch (const std::exception&) {
            }
            break;
        }
    }
    ::close(fd);
}

class TcpTransport final : public Transport {
public:
    explicit TcpTransport(std::vector<Worker> workers) {
        const auto count = static_cast<Index>(workers.size());
        dims_ = workers.front().dim();
        for (const Worker& w : workers) {
            sizes_.push_back(w.sample_count());
        }

        int listener = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listener < 0) {
            throw TransportSetupFailedError("cannot create listening socket");
        }
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(listener, static_cast<int>(count)) != 0) {
            ::close(listener);
            throw TransportSetupFailedError("cannot bind loopback listener");
        }
        socklen_t len = sizeof(addr);
        if (::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
            ::close(listener);
            throw TransportSetupFailedError("cannot read listener address");
        }

        // Each worker thread connects and introduces itself with a hello
        // frame carrying its index; accept order is arbitrary.
        threads_.reserve(workers.size());
        for (auto& w : workers) {
            threads_.emplace_back(
                [fd_addr = addr](Worker worker) {
                    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
                    if (fd < 0) return;
                    sockaddr_in target = fd_addr;
                    if (::connect(fd, reinterpret_cast<sockaddr*>(&target),
                                  sizeof(target)) != 0) {
                        ::close(fd);
                        return;
                    }
                    write_frame(fd, Message::control(
                                        Kind::hello,
                                        static_cast<std::uint64_t>(worker.index())));
                    worker_loop(std::move(worker), fd);
                },
                std::move(w));
        }

        fds_.assign(static_cast<std::size_t>(count), -1);
        for (Index i = 0; i < count; ++i) {
            int fd = ::accept(listener, nullptr, nullptr);
            if (fd < 0) {
                ::close(listener);
                throw TransportSetupFailedError("accept failed");
            }
            Message hello;
            if (!read_frame(fd, hello) || hello.kind != Kind::hello ||
                hello.weight >= static_cast<std::uint64_t>(count) ||
                fds_[hello.weight] != -1) {
                ::close(listener);
                throw TransportSetupFailedError("bad worker handshake");
            }
            fds_[hello.weight] = fd;
        }
        ::close(listener);
    }

    ~TcpTransport() override {
        for (int fd : fds_) {
            if (fd < 0) continue;
            try {
                write_frame(fd, Message::control(Kind::end_session));
            } catch (const std::exception&) {
            }
        }
        for (auto& t : threads_) {
            if (t.joinable()) t.join();
        }
    }

    void send(Index k, const Message& m) override {
        write_frame(fds_[static_cast<std::size_t>(k)], m);
    }

    Message receive(Index k) override {
        Message m;
        if (!read_frame(fds_[static_cast<std::size_t>(k)], m)) {
            throw WorkerUnreachableError("worker " + std::to_string(k) +
                                         " closed its connection");
        }
        if (m.kind == Kind::worker_error) {
            throw WorkerUnreachableError("worker " + std::to_string(k) +
                                         " reported a failure");
        }
        return m;
    }

    Index worker_count() const override {
        return static_cast<Index>(sizes_.size());
    }
    Index dim() const override { return dims_; }
    Index samples_on(Index k) const override {
        return sizes_[static_cast<std::size_t>(k)];
    }

private:
    Index dims_ = 0;
    std::vector<Index> sizes_;
    std::vector<int> fds_;
    std::vector<std::thread> threads_;
};

}  // namespace

std::unique_ptr<Transport> make_tcp_transport(std::vector<Matrix> shards,
                                              std::vector<Vector> ys,
                                              OperatorKind op) {
    return std::make_unique<TcpTransport>(
        spawn_workers(std::move(shards), std::move(ys), op));
}

}  // namespace deig
