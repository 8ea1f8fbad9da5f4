#include "scrambench/protocol.hpp"
#include "scrambench/error.hpp"

#include <cerrno>
#include <cstring>
#include <sstream>

#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxLineBytes = 1 << 20;

std::string require_string(const json &msg, const char *key) {
    if (!msg.contains(key) || !msg[key].is_string())
        throw Error(ErrorCode::ProtocolError, std::string("message lacks string field '") + key + "'");
    return msg[key].get<std::string>();
}

std::uint64_t require_uint(const json &msg, const char *key) {
    if (!msg.contains(key) || !msg[key].is_number_unsigned())
        throw Error(ErrorCode::ProtocolError,
                    std::string("message lacks unsigned field '") + key + "'");
    return msg[key].get<std::uint64_t>();
}

std::uint64_t parse_modulus(const json &msg) {
    const auto text = require_string(msg, "modulus");
    std::uint64_t v = 0;
    if (text.empty() || text.size() > 20)
        throw Error(ErrorCode::ProtocolError, "bad modulus");
    for (char c : text) {
        if (c < '0' || c > '9')
            throw Error(ErrorCode::ProtocolError, "bad modulus");
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

std::vector<FieldElement> parse_slots(const json &msg) {
    if (!msg.contains("slots") || !msg["slots"].is_array())
        throw Error(ErrorCode::ProtocolError, "message lacks 'slots' array");
    std::vector<FieldElement> out;
    out.reserve(msg["slots"].size());
    for (const auto &v : msg["slots"]) {
        auto e = v.is_string() ? FieldElement::from_decimal(v.get<std::string>()) : std::nullopt;
        if (!e)
            throw Error(ErrorCode::ProtocolError, "slot values must be decimal strings below p");
        out.push_back(*e);
    }
    return out;
}

ordered_json slots_json(const std::vector<FieldElement> &values) {
    ordered_json arr = ordered_json::array();
    for (const auto &e : values)
        arr.push_back(e.to_decimal());
    return arr;
}

std::optional<ErrorCode> error_code_from_string(std::string_view s) {
    for (int c = 0; c <= static_cast<int>(ErrorCode::BindFailure); ++c)
        if (to_string(static_cast<ErrorCode>(c)) == s)
            return static_cast<ErrorCode>(c);
    return std::nullopt;
}

json parse_line(const std::string &line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ProtocolError, std::string("malformed message: ") + e.what());
    }
}

std::string type_of(const json &msg) {
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        throw Error(ErrorCode::ProtocolError, "message lacks 'type'");
    return msg["type"].get<std::string>();
}

} // namespace

ordered_json make_hello(std::string_view computation_id, std::uint64_t modulus) {
    return {{"type", "HELLO"},
            {"protocol_version", kProtocolVersion},
            {"computation_id", computation_id},
            {"modulus", std::to_string(modulus)}};
}

ordered_json make_submit(const ShareBundle &b) {
    return {{"type", "SUBMIT"},
            {"cohort", b.cohort},
            {"session_token", b.session_token},
            {"server_index", b.server_index},
            {"server_count", b.server_count},
            {"modulus", std::to_string(b.modulus)},
            {"slots", slots_json(b.shares)}};
}

ordered_json make_ack(std::string_view cohort) { return {{"type", "ACK"}, {"cohort", cohort}}; }

ordered_json make_seal(std::string_view cohort) { return {{"type", "SEAL"}, {"cohort", cohort}}; }

ordered_json make_partial(const CohortPartial &p, std::string_view computation_id) {
    return {{"type", "PARTIAL"},
            {"computation_id", computation_id},
            {"cohort", p.cohort},
            {"n", p.participants},
            {"server_index", p.server_index},
            {"server_count", p.server_count},
            {"modulus", std::to_string(p.modulus)},
            {"layout", slots::kLayoutVersion},
            {"slots", slots_json(p.sums)}};
}

ordered_json make_error(ErrorCode code, std::string_view message) {
    return {{"type", "ERROR"}, {"code", to_string(code)}, {"message", message}};
}

ShareBundle bundle_from_submit(const json &msg) {
    if (type_of(msg) != "SUBMIT")
        throw Error(ErrorCode::ProtocolError, "expected SUBMIT");
    ShareBundle b;
    b.cohort = require_string(msg, "cohort");
    b.session_token = require_string(msg, "session_token");
    b.server_index = require_uint(msg, "server_index");
    b.server_count = require_uint(msg, "server_count");
    b.modulus = parse_modulus(msg);
    b.shares = parse_slots(msg);
    return b;
}

CohortPartial partial_from_json(const json &msg) {
    raise_if_error(msg);
    if (type_of(msg) != "PARTIAL")
        throw Error(ErrorCode::ProtocolError, "expected PARTIAL");
    if (msg.contains("layout") && msg["layout"] != slots::kLayoutVersion)
        throw Error(ErrorCode::LayoutMismatch, "partial uses layout " + msg["layout"].dump());
    CohortPartial p;
    p.cohort = require_string(msg, "cohort");
    p.participants = require_uint(msg, "n");
    p.server_index = require_uint(msg, "server_index");
    p.server_count = require_uint(msg, "server_count");
    p.modulus = parse_modulus(msg);
    p.sums = parse_slots(msg);
    return p;
}

void raise_if_error(const json &msg) {
    if (!msg.is_object() || msg.value("type", "") != "ERROR")
        return;
    const auto code = error_code_from_string(msg.value("code", ""));
    throw Error(code.value_or(ErrorCode::ProtocolError),
                "server replied: " + msg.value("message", std::string()));
}

AggregationServer::AggregationServer(std::size_t server_index, std::size_t server_count,
                                     std::string computation_id)
    : server_index_(server_index), server_count_(server_count),
      computation_id_(std::move(computation_id)) {
    if (server_count_ < 2 || server_index_ < 1 || server_index_ > server_count_)
        throw Error(ErrorCode::InvalidInput, "server index must lie in 1..M with M >= 2");
    for (Cohort c : kAllCohorts) {
        auto s = std::make_unique<Slot>();
        s->partial = empty_partial(server_index_, server_count_, cohort_tag(c));
        cohorts_.emplace(std::string(cohort_tag(c)), std::move(s));
    }
}

AggregationServer::Slot &AggregationServer::slot(std::string_view cohort) const {
    auto it = cohorts_.find(cohort);
    if (it == cohorts_.end())
        throw Error(ErrorCode::UnknownCohort, "no cohort '" + std::string(cohort) + "'");
    return *it->second;
}

void AggregationServer::accumulate(const ShareBundle &bundle) {
    Slot &s = slot(bundle.cohort);
    std::lock_guard lock(s.mutex);
    if (s.sealed)
        throw Error(ErrorCode::ProtocolError, "cohort '" + bundle.cohort + "' is sealed");
    accumulate_into(s.partial, bundle);
}

CohortPartial AggregationServer::seal(std::string_view cohort) {
    Slot &s = slot(cohort);
    std::lock_guard lock(s.mutex);
    s.sealed = true;
    CohortPartial out = s.partial;
    out.sessions.clear();
    return out;
}

std::uint64_t AggregationServer::participants(std::string_view cohort) const {
    Slot &s = slot(cohort);
    std::lock_guard lock(s.mutex);
    return s.partial.participants;
}

std::string ServerSession::handle(const std::string &line) {
    try {
        const json msg = parse_line(line);
        const std::string type = type_of(msg);
        if (type == "HELLO") {
            if (require_uint(msg, "protocol_version") != static_cast<std::uint64_t>(kProtocolVersion))
                throw Error(ErrorCode::ProtocolError, "unsupported protocol version");
            if (parse_modulus(msg) != FieldElement::kModulus)
                throw Error(ErrorCode::ModulusMismatch, "server uses modulus " +
                                                            std::to_string(FieldElement::kModulus));
            if (require_string(msg, "computation_id") != server_.computation_id())
                throw Error(ErrorCode::ProtocolError, "unknown computation id");
            greeted_ = true;
            return make_hello(server_.computation_id()).dump();
        }
        if (!greeted_)
            throw Error(ErrorCode::ProtocolError, "HELLO required first");
        if (type == "SUBMIT") {
            const ShareBundle bundle = bundle_from_submit(msg);
            server_.accumulate(bundle);
            return make_ack(bundle.cohort).dump();
        }
        if (type == "SEAL")
            return make_partial(server_.seal(require_string(msg, "cohort")),
                                server_.computation_id())
                .dump();
        throw Error(ErrorCode::ProtocolError, "unexpected message type '" + type + "'");
    } catch (const Error &e) {
        return make_error(e.code(), e.what()).dump();
    }
}

namespace {

json expect_reply(Transport &t, const ordered_json &request, std::string_view type) {
    const json reply = parse_line(t.exchange(request.dump()));
    raise_if_error(reply);
    if (type_of(reply) != type)
        throw Error(ErrorCode::ProtocolError, "expected " + std::string(type) + " reply");
    return reply;
}

} // namespace

void submit_bundles(Transport &t, std::string_view computation_id,
                    const std::vector<ShareBundle> &bundles) {
    expect_reply(t, make_hello(computation_id), "HELLO");
    for (const auto &b : bundles)
        expect_reply(t, make_submit(b), "ACK");
}

CohortPartial request_partial(Transport &t, std::string_view computation_id,
                              std::string_view cohort) {
    expect_reply(t, make_hello(computation_id), "HELLO");
    return partial_from_json(expect_reply(t, make_seal(cohort), "PARTIAL"));
}

std::string share_file_contents(std::string_view computation_id,
                                const std::vector<ShareBundle> &bundles) {
    std::string out = make_hello(computation_id).dump() + "\n";
    for (const auto &b : bundles)
        out += make_submit(b).dump() + "\n";
    return out;
}

void ingest_share_file(AggregationServer &server, const std::string &contents) {
    ServerSession session(server);
    std::istringstream in(contents);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const json reply = parse_line(session.handle(line));
        try {
            raise_if_error(reply);
        } catch (const Error &e) {
            throw Error(e.code(), "share line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// Sockets

namespace {

bool send_all(int fd, const std::string &data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

// Returns false on EOF/error before a full line arrived.
bool read_line(int fd, std::string &buffer, std::string &line) {
    for (;;) {
        const auto pos = buffer.find('\n');
        if (pos != std::string::npos) {
            line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            return true;
        }
        if (buffer.size() > kMaxLineBytes)
            return false;
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

struct AddrInfo {
    addrinfo *list = nullptr;
    ~AddrInfo() {
        if (list)
            freeaddrinfo(list);
    }
};

void resolve(const std::string &host, std::uint16_t port, bool passive, AddrInfo &out) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive)
        hints.ai_flags = AI_PASSIVE;
    const std::string service = std::to_string(port);
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.list);
    if (rc != 0)
        throw Error(passive ? ErrorCode::BindFailure : ErrorCode::IoError,
                    "cannot resolve " + host + ": " + gai_strerror(rc));
}

} // namespace

TcpTransport::TcpTransport(const std::string &host, std::uint16_t port) {
    AddrInfo ai;
    resolve(host, port, false, ai);
    for (addrinfo *p = ai.list; p; p = p->ai_next) {
        fd_ = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd_ < 0)
            continue;
        if (::connect(fd_, p->ai_addr, p->ai_addrlen) == 0)
            return;
        ::close(fd_);
        fd_ = -1;
    }
    throw Error(ErrorCode::IoError, "cannot connect to " + host + ":" + std::to_string(port));
}

TcpTransport::~TcpTransport() {
    if (fd_ >= 0)
        ::close(fd_);
}

std::string TcpTransport::exchange(const std::string &line) {
    if (!send_all(fd_, line + "\n"))
        throw Error(ErrorCode::IoError, "connection lost while sending");
    std::string reply;
    if (!read_line(fd_, buffer_, reply))
        throw Error(ErrorCode::IoError, "connection closed before reply");
    return reply;
}

TcpAggregationService::TcpAggregationService(AggregationServer &server, Logger log)
    : server_(server), log_(std::move(log)) {}

TcpAggregationService::~TcpAggregationService() {
    stop();
    std::lock_guard lock(threads_mutex_);
    for (auto &t : threads_)
        if (t.joinable())
            t.join();
}

std::uint16_t TcpAggregationService::bind(const std::string &host, std::uint16_t port) {
    AddrInfo ai;
    resolve(host, port, true, ai);
    for (addrinfo *p = ai.list; p; p = p->ai_next) {
        const int fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0)
            continue;
        const int yes = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        if (::bind(fd, p->ai_addr, p->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            listen_fd_ = fd;
            sockaddr_in bound{};
            socklen_t len = sizeof(bound);
            ::getsockname(fd, reinterpret_cast<sockaddr *>(&bound), &len);
            return ntohs(bound.sin_port);
        }
        ::close(fd);
    }
    throw Error(ErrorCode::BindFailure, "cannot listen on " + host + ":" + std::to_string(port) +
                                            ": " + std::strerror(errno));
}

void TcpAggregationService::run() {
    if (listen_fd_ < 0)
        throw Error(ErrorCode::BindFailure, "service is not bound");
    while (!stopping_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        std::lock_guard lock(threads_mutex_);
        active_fds_.insert(fd);
        threads_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void TcpAggregationService::stop() {
    if (stopping_.exchange(true))
        return;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    std::lock_guard lock(threads_mutex_);
    for (int fd : active_fds_)
        ::shutdown(fd, SHUT_RDWR);
}

void TcpAggregationService::serve_connection(int fd) {
    ServerSession session(server_);
    std::string buffer;
    std::string line;
    std::size_t messages = 0;
    while (!stopping_ && read_line(fd, buffer, line)) {
        ++messages;
        if (!send_all(fd, session.handle(line) + "\n"))
            break;
    }
    {
        std::lock_guard lock(threads_mutex_);
        active_fds_.erase(fd);
    }
    ::close(fd);
    if (log_)
        log_("server " + std::to_string(server_.server_index()) + ": connection closed after " +
             std::to_string(messages) + " messages");
}

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string_view::npos || colon + 1 >= endpoint.size())
        throw Error(ErrorCode::InvalidInput, "endpoint must be host:port");
    unsigned long port = 0;
    for (char c : endpoint.substr(colon + 1)) {
        if (c < '0' || c > '9')
            throw Error(ErrorCode::InvalidInput, "bad port in '" + std::string(endpoint) + "'");
        port = port * 10 + static_cast<unsigned long>(c - '0');
        if (port > 65535)
            throw Error(ErrorCode::InvalidInput, "port out of range");
    }
    return {std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

} // namespace scrambench
