#pragma once

// The memory kernel as a pure state machine: S_{t+1} = apply(S_t, C_t).
//
// Commands carry fixed-point payloads and caller-chosen ids, so the kernel
// never consults anything outside (state, command). A rejected command leaves
// the state untouched and does not advance the clock.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "valori/bytes.hpp"
#include "valori/digest.hpp"
#include "valori/fixed.hpp"
#include "valori/hnsw.hpp"

namespace valori {

// Numeric precision is part of the state's identity. Only Q16.16 has an
// arithmetic implementation; the wider tags are reserved identifiers.
enum class PrecisionContract : std::uint8_t {
  kQ16_16 = 1,
  kQ32_32 = 2,
  kQ64_64 = 3,
};

std::string_view precision_name(PrecisionContract p);

struct KernelConfig {
  std::uint32_t dim = 384;
  PrecisionContract precision = PrecisionContract::kQ16_16;
  hnsw::Params hnsw;

  // Throws Error(kUnimplemented) for non-Q16.16 contracts and
  // Error(kInvalidArgument) for zero or out-of-range sizes.
  void validate() const;

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

inline constexpr std::size_t kMaxMetadataBytes = 64 * 1024;

enum class Opcode : std::uint8_t { kInsert = 1, kDelete = 2, kLink = 3 };

std::string_view opcode_name(Opcode op);

struct InsertCmd {
  VectorId id = 0;
  FixedVector coords;
  Bytes metadata;

  friend bool operator==(const InsertCmd&, const InsertCmd&) = default;
};

struct DeleteCmd {
  VectorId id = 0;

  friend bool operator==(const DeleteCmd&, const DeleteCmd&) = default;
};

struct LinkCmd {
  VectorId a = 0;
  VectorId b = 0;

  friend bool operator==(const LinkCmd&, const LinkCmd&) = default;
};

using Command = std::variant<InsertCmd, DeleteCmd, LinkCmd>;

Opcode opcode_of(const Command& cmd) noexcept;

struct ApplyReceipt {
  std::uint64_t clock = 0;
  Opcode opcode = Opcode::kInsert;
  std::vector<VectorId> affected;

  friend bool operator==(const ApplyReceipt&, const ApplyReceipt&) = default;
};

using Link = std::pair<VectorId, VectorId>;  // always first < second

class KernelState {
 public:
  explicit KernelState(KernelConfig config);

  const KernelConfig& config() const noexcept { return config_; }
  std::uint64_t clock() const noexcept { return clock_; }
  const VectorStore& vectors() const noexcept { return vectors_; }
  const std::map<VectorId, Bytes>& metadata() const noexcept { return metadata_; }
  const std::set<Link>& links() const noexcept { return links_; }
  const std::set<VectorId>& tombstones() const noexcept { return tombstones_; }
  const hnsw::Graph& index() const noexcept { return index_; }

  bool is_live(VectorId id) const { return vectors_.contains(id); }

  // Throws exactly the Error that apply(cmd) would, without mutating.
  void check(const Command& cmd) const;

  // In-place transition with the strong exception guarantee: check() runs
  // before the first mutation.
  ApplyReceipt apply(const Command& cmd);

  friend bool operator==(const KernelState&, const KernelState&) = default;

 private:
  friend class SnapshotCodec;

  void check_insert(const InsertCmd& cmd) const;
  void check_delete(const DeleteCmd& cmd) const;
  void check_link(const LinkCmd& cmd) const;
  ApplyReceipt apply_insert(const InsertCmd& cmd);
  ApplyReceipt apply_delete(const DeleteCmd& cmd);
  ApplyReceipt apply_link(const LinkCmd& cmd);

  KernelConfig config_;
  std::uint64_t clock_ = 0;
  VectorStore vectors_;
  std::map<VectorId, Bytes> metadata_;
  std::set<Link> links_;
  std::set<VectorId> tombstones_;
  hnsw::Graph index_;
};

// Value-semantics transition function. On error the input state is left
// as-is (the caller still owns its original copy) and the Error propagates.
std::pair<KernelState, ApplyReceipt> apply(KernelState state,
                                           const Command& cmd);

// Up to k live ids ranked by (squared L2, id). Read-only; k must be >= 1.
hnsw::SearchResult query(const KernelState& state, const FixedVector& q,
                         std::size_t k);
hnsw::SearchResult query(const KernelState& state, const FixedVector& q,
                         std::size_t k, std::size_t ef_search);

// SHA-256 of the canonical snapshot bytes.
Digest state_hash(const KernelState& state);

}  // namespace valori
