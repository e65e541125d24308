#pragma once

// Transports for the one-shot upload round. Both routes push every summary
// through the same serialize -> parse path, so a federation exchanged
// in-process is bit-identical to one exchanged over TCP. The socket side is
// plain POSIX: loopback listener, one connection per client, NDJSON message,
// single-line JSON ack.

#include <atomic>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "fedscreen/wire.hpp"

namespace fedscreen {

struct TransportStats {
    std::size_t messages = 0;
    std::size_t payload_values = 0;
    std::size_t payload_bytes = 0; // bytes of encoded numeric payload
    std::size_t wire_bytes = 0;    // full NDJSON text size

    void absorb(const ParsedMessage& msg, std::size_t text_bytes) {
        ++messages;
        payload_values += msg.payload_values;
        payload_bytes += msg.payload_bytes;
        wire_bytes += text_bytes;
    }
};

// In-process exchange: serialize and re-parse each summary, exactly the bytes
// a socket would carry.
inline std::vector<ClientSummary> roundtrip_in_process(const std::vector<ClientSummary>& locals,
                                                       std::size_t block_width = kDefaultBlockWidth,
                                                       const std::string& round = "main",
                                                       TransportStats* stats = nullptr) {
    std::vector<ClientSummary> received;
    received.reserve(locals.size());
    for (const auto& summary : locals) {
        const std::string text = serialize_summary(summary, block_width, round);
        ParsedMessage msg = parse_message(text);
        if (stats) stats->absorb(msg, text.size());
        received.push_back(std::move(msg.summary));
    }
    return received;
}

namespace net {

inline void throw_errno(const std::string& what) {
    throw WireFrameError(what + ": " + std::strerror(errno));
}

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Fd& operator=(Fd&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    ~Fd() { reset(); }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }
    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
};

inline void send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto sent = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (sent <= 0) throw_errno("send failed");
        off += static_cast<std::size_t>(sent);
    }
}

// Buffered line reader over a socket. Returns false on clean EOF at a line
// boundary; a dangling partial line raises WireFrameError.
class LineReader {
public:
    explicit LineReader(int fd) : fd_(fd) {}

    bool next_line(std::string& out) {
        while (true) {
            const auto pos = buffer_.find('\n');
            if (pos != std::string::npos) {
                out = buffer_.substr(0, pos);
                buffer_.erase(0, pos + 1);
                return true;
            }
            char chunk[4096];
            const auto got = ::recv(fd_, chunk, sizeof(chunk), 0);
            if (got < 0) throw_errno("recv failed");
            if (got == 0) {
                if (!buffer_.empty())
                    throw WireFrameError("connection closed mid-line");
                return false;
            }
            buffer_.append(chunk, static_cast<std::size_t>(got));
        }
    }

private:
    int fd_;
    std::string buffer_;
};

} // namespace net

// Loopback TCP server for one upload round: accepts `expected` connections,
// reads each NDJSON message on its own thread, acks, and hands the parsed
// summaries back once every connection has drained. The first wire error
// aborts the round (after acking the offender with an error record).
class SocketServer {
public:
    explicit SocketServer(int port = 0) {
        listen_fd_ = net::Fd(::socket(AF_INET, SOCK_STREAM, 0));
        if (!listen_fd_.valid()) net::throw_errno("socket failed");
        const int one = 1;
        ::setsockopt(listen_fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::bind(listen_fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
            net::throw_errno("bind failed");
        if (::listen(listen_fd_.get(), 64) != 0) net::throw_errno("listen failed");
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        if (::getsockname(listen_fd_.get(), reinterpret_cast<sockaddr*>(&bound), &len) != 0)
            net::throw_errno("getsockname failed");
        port_ = static_cast<int>(ntohs(bound.sin_port));
    }

    int port() const { return port_; }

    // Blocks until `expected` messages have arrived (ingested concurrently),
    // then returns them in arrival order; aggregation sorts by client id.
    std::vector<ParsedMessage> collect(int expected, TransportStats* stats = nullptr) {
        std::vector<ParsedMessage> messages;
        std::vector<std::thread> workers;
        std::mutex mu;
        std::exception_ptr first_error;

        for (int i = 0; i < expected; ++i) {
            net::Fd conn(::accept(listen_fd_.get(), nullptr, nullptr));
            if (!conn.valid()) net::throw_errno("accept failed");
            workers.emplace_back([fd = std::move(conn), &messages, &mu, &first_error,
                                  stats]() mutable {
                try {
                    net::LineReader reader_lines(fd.get());
                    SummaryReader reader;
                    std::string line;
                    std::size_t text_bytes = 0;
                    while (!reader.done()) {
                        if (!reader_lines.next_line(line))
                            throw WireFrameError("truncated wire message: connection closed");
                        if (line.empty()) continue;
                        text_bytes += line.size() + 1;
                        reader.feed_line(line);
                    }
                    ParsedMessage msg = reader.take();
                    net::send_all(fd.get(), "{\"kind\":\"ack\",\"status\":\"ok\"}\n");
                    std::lock_guard<std::mutex> lock(mu);
                    if (stats) stats->absorb(msg, text_bytes);
                    messages.push_back(std::move(msg));
                } catch (...) {
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (!first_error) first_error = std::current_exception();
                    }
                    wire_json err;
                    err["kind"] = "error";
                    err["message"] = "upload rejected";
                    try {
                        net::send_all(fd.get(), err.dump() + "\n");
                    } catch (...) {
                        // The peer is already gone; the stored error suffices.
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (first_error) std::rethrow_exception(first_error);
        return messages;
    }

private:
    net::Fd listen_fd_;
    int port_ = 0;
};

// Sends raw text to a loopback server and returns the single reply line
// (empty if the server closed without replying).
inline std::string socket_exchange(const std::string& host, int port, const std::string& text) {
    net::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) net::throw_errno("socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw WireFrameError("bad host address '" + host + "'");
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
        net::throw_errno("connect to " + host + ":" + std::to_string(port) + " failed");
    net::send_all(fd.get(), text);
    ::shutdown(fd.get(), SHUT_WR);
    net::LineReader lines(fd.get());
    std::string reply;
    if (!lines.next_line(reply)) return "";
    return reply;
}

// One client-side upload; throws if the server does not ack.
inline void upload_summary(const std::string& host, int port, const ClientSummary& summary,
                           std::size_t block_width = kDefaultBlockWidth,
                           const std::string& round = "main") {
    const std::string reply =
        socket_exchange(host, port, serialize_summary(summary, block_width, round));
    if (reply.empty()) throw WireFrameError("server closed connection without ack");
    wire_json rec;
    try {
        rec = wire_json::parse(reply);
    } catch (const nlohmann::json::exception&) {
        throw WireFrameError("malformed ack from server");
    }
    if (!rec.contains("kind") || rec["kind"] != "ack")
        throw WireFrameError("server rejected upload");
}

} // namespace fedscreen
