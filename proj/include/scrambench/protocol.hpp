#pragma once

// Newline-delimited JSON messages between participants, aggregation servers
// and the analyst:
//
//   participant -> server   HELLO, SUBMIT ...           server replies HELLO, ACK ...
//   analyst     -> server   HELLO, SEAL {cohort}        server replies HELLO, PARTIAL
//
// Any failure is answered with ERROR {code, message}. Field elements travel
// as decimal strings. The same lines make up offline share files.

#include "scrambench/aggregation.hpp"
#include "scrambench/error.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace scrambench {

inline constexpr int kProtocolVersion = 1;

nlohmann::ordered_json make_hello(std::string_view computation_id,
                                  std::uint64_t modulus = FieldElement::kModulus);
nlohmann::ordered_json make_submit(const ShareBundle &bundle);
nlohmann::ordered_json make_ack(std::string_view cohort);
nlohmann::ordered_json make_seal(std::string_view cohort);
nlohmann::ordered_json make_partial(const CohortPartial &partial, std::string_view computation_id);
nlohmann::ordered_json make_error(ErrorCode code, std::string_view message);

ShareBundle bundle_from_submit(const nlohmann::json &msg);
CohortPartial partial_from_json(const nlohmann::json &msg);

/// Throws Error carrying the remote code if `msg` is an ERROR message.
void raise_if_error(const nlohmann::json &msg);

/// One aggregation server's state across all cohorts. Submissions to a cohort
/// are serialized under that cohort's lock; different cohorts proceed
/// independently.
class AggregationServer {
  public:
    AggregationServer(std::size_t server_index, std::size_t server_count,
                      std::string computation_id);

    std::size_t server_index() const noexcept { return server_index_; }
    std::size_t server_count() const noexcept { return server_count_; }
    const std::string &computation_id() const noexcept { return computation_id_; }

    void accumulate(const ShareBundle &bundle);
    /// Freezes the cohort and returns its partial. Repeat calls return the
    /// same partial.
    CohortPartial seal(std::string_view cohort);
    std::uint64_t participants(std::string_view cohort) const;

  private:
    struct Slot {
        mutable std::mutex mutex;
        CohortPartial partial;
        bool sealed = false;
    };
    Slot &slot(std::string_view cohort) const;

    std::size_t server_index_;
    std::size_t server_count_;
    std::string computation_id_;
    std::map<std::string, std::unique_ptr<Slot>, std::less<>> cohorts_;
};

/// Per-connection message state machine. HELLO must come first.
class ServerSession {
  public:
    explicit ServerSession(AggregationServer &server) : server_(server) {}
    std::string handle(const std::string &line);

  private:
    AggregationServer &server_;
    bool greeted_ = false;
};

/// Request/response channel carrying one line each way.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual std::string exchange(const std::string &line) = 0;
};

/// In-process transport driving a ServerSession directly.
class LoopbackTransport final : public Transport {
  public:
    explicit LoopbackTransport(AggregationServer &server) : session_(server) {}
    std::string exchange(const std::string &line) override { return session_.handle(line); }

  private:
    ServerSession session_;
};

/// Blocking TCP client transport.
class TcpTransport final : public Transport {
  public:
    TcpTransport(const std::string &host, std::uint16_t port);
    ~TcpTransport() override;
    TcpTransport(const TcpTransport &) = delete;
    TcpTransport &operator=(const TcpTransport &) = delete;
    std::string exchange(const std::string &line) override;

  private:
    int fd_ = -1;
    std::string buffer_;
};

/// HELLO then one SUBMIT per bundle; every reply must be an ACK.
void submit_bundles(Transport &transport, std::string_view computation_id,
                    const std::vector<ShareBundle> &bundles);
/// HELLO then SEAL; returns the server's PARTIAL.
CohortPartial request_partial(Transport &transport, std::string_view computation_id,
                              std::string_view cohort);

/// Share file: the HELLO line followed by SUBMIT lines, for one server.
std::string share_file_contents(std::string_view computation_id,
                                const std::vector<ShareBundle> &bundles);
/// Replays a share file into `server`; throws on the first ERROR reply.
void ingest_share_file(AggregationServer &server, const std::string &contents);

/// TCP listener handling each connection on its own thread.
class TcpAggregationService {
  public:
    using Logger = std::function<void(const std::string &)>;

    TcpAggregationService(AggregationServer &server, Logger log = {});
    ~TcpAggregationService();
    TcpAggregationService(const TcpAggregationService &) = delete;
    TcpAggregationService &operator=(const TcpAggregationService &) = delete;

    /// Binds and listens; returns the bound port (useful with port 0).
    std::uint16_t bind(const std::string &host, std::uint16_t port);
    /// Accepts connections until stop() is called.
    void run();
    void stop();

  private:
    void serve_connection(int fd);

    AggregationServer &server_;
    Logger log_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::mutex threads_mutex_;
    std::vector<std::thread> threads_;
    std::set<int> active_fds_;
};

/// Parses "host:port".
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

} // namespace scrambench
