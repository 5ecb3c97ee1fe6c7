#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "valori/digest.hpp"
#include "valori/kernel.hpp"
#include "valori/replay_log.hpp"

namespace valori::node {

struct NodeOptions {
  KernelConfig config;
  // Empty log_path keeps the node in memory only.
  std::filesystem::path log_path;
  // Where the base snapshot of the most recent restore lives. Defaults to
  // "<log_path>.base.vks" when empty.
  std::filesystem::path snapshot_dir;
  replay::SyncPolicy sync = replay::SyncPolicy::kPerRecord;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

inline constexpr const char* kHashHeader = "X-Valori-State-Hash";

// Transport-independent request handling. Mutations pass through one writer
// gate in arrival order; the order admitted is the order logged and applied.
// Queries share a reader lock and never observe a half-applied command or a
// half-restored state.
class NodeService {
 public:
  // Loads the base snapshot (if any) and replays the log on top of it.
  explicit NodeService(NodeOptions options);

  Response insert(std::string_view body);
  Response remove(std::string_view body);
  Response link(std::string_view body);
  Response query(std::string_view body) const;
  Response snapshot() const;
  Response restore(std::span<const std::uint8_t> body);
  Response hash() const;
  Response health() const;

  Digest current_hash() const;
  std::uint64_t clock() const;
  std::optional<std::filesystem::path> base_snapshot_path() const;
  const std::filesystem::path& log_path() const { return options_.log_path; }

 private:
  Response mutate(const Command& cmd);
  Response state_summary(int status) const;  // caller holds state_mu_

  NodeOptions options_;
  std::mutex writer_mu_;
  mutable std::shared_mutex state_mu_;
  KernelState state_;
  Digest hash_;
  std::optional<replay::LogWriter> log_;
};

}  // namespace valori::node
