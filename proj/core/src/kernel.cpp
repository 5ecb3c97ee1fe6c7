#include "valori/kernel.hpp"

#include <string>

#include "valori/error.hpp"
#include "valori/snapshot.hpp"

namespace valori {

std::string_view precision_name(PrecisionContract p) {
  switch (p) {
    case PrecisionContract::kQ16_16: return "q16.16";
    case PrecisionContract::kQ32_32: return "q32.32";
    case PrecisionContract::kQ64_64: return "q64.64";
  }
  return "unknown";
}

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::kInsert: return "insert";
    case Opcode::kDelete: return "delete";
    case Opcode::kLink: return "link";
  }
  return "unknown";
}

void KernelConfig::validate() const {
  switch (precision) {
    case PrecisionContract::kQ16_16:
      break;
    case PrecisionContract::kQ32_32:
    case PrecisionContract::kQ64_64:
      throw Error(Errc::kUnimplemented,
                  std::string("precision contract ") +
                      std::string(precision_name(precision)) +
                      " is declared but has no arithmetic implementation");
    default:
      throw Error(Errc::kUnsupportedPrecision, "unknown precision tag");
  }
  if (dim == 0 || dim > kMaxDim) {
    throw Error(Errc::kInvalidArgument, "dim must be in [1, 65536]");
  }
  if (hnsw.m == 0 || hnsw.ef_construction == 0 || hnsw.ef_search == 0) {
    throw Error(Errc::kInvalidArgument, "HNSW parameters must be positive");
  }
}

Opcode opcode_of(const Command& cmd) noexcept {
  return static_cast<Opcode>(cmd.index() + 1);
}

KernelState::KernelState(KernelConfig config)
    : config_(config), index_(config.hnsw) {
  config_.validate();
}

void KernelState::check(const Command& cmd) const {
  std::visit(
      [this](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, InsertCmd>) check_insert(c);
        if constexpr (std::is_same_v<T, DeleteCmd>) check_delete(c);
        if constexpr (std::is_same_v<T, LinkCmd>) check_link(c);
      },
      cmd);
}

ApplyReceipt KernelState::apply(const Command& cmd) {
  check(cmd);
  return std::visit(
      [this](const auto& c) -> ApplyReceipt {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, InsertCmd>) return apply_insert(c);
        if constexpr (std::is_same_v<T, DeleteCmd>) return apply_delete(c);
        if constexpr (std::is_same_v<T, LinkCmd>) return apply_link(c);
      },
      cmd);
}

void KernelState::check_insert(const InsertCmd& cmd) const {
  if (cmd.coords.dim() != config_.dim) {
    throw Error(Errc::kDimensionMismatch,
                "insert " + std::to_string(cmd.id) + " has dim " +
                    std::to_string(cmd.coords.dim()) + ", kernel dim is " +
                    std::to_string(config_.dim));
  }
  if (vectors_.contains(cmd.id)) {
    throw Error(Errc::kDuplicateId, "id " + std::to_string(cmd.id) + " is live");
  }
  // Tombstoned ids are retired for good.
  if (tombstones_.contains(cmd.id)) {
    throw Error(Errc::kDuplicateId,
                "id " + std::to_string(cmd.id) + " was deleted and cannot be reused");
  }
  if (cmd.metadata.size() > kMaxMetadataBytes) {
    throw Error(Errc::kMetadataTooLarge,
                std::to_string(cmd.metadata.size()) + " bytes");
  }
}

ApplyReceipt KernelState::apply_insert(const InsertCmd& cmd) {
  auto [it, inserted] = vectors_.emplace(cmd.id, cmd.coords);
  try {
    metadata_.emplace(cmd.id, cmd.metadata);
    index_.insert(cmd.id, vectors_);
  } catch (...) {
    metadata_.erase(cmd.id);
    vectors_.erase(it);
    throw;
  }
  ++clock_;
  return {clock_, Opcode::kInsert, {cmd.id}};
}

void KernelState::check_delete(const DeleteCmd& cmd) const {
  if (!vectors_.contains(cmd.id)) {
    throw Error(Errc::kUnknownId,
                "delete of missing or deleted id " + std::to_string(cmd.id));
  }
}

ApplyReceipt KernelState::apply_delete(const DeleteCmd& cmd) {
  index_.remove(cmd.id, vectors_);
  vectors_.erase(cmd.id);
  metadata_.erase(cmd.id);
  std::erase_if(links_, [id = cmd.id](const Link& l) {
    return l.first == id || l.second == id;
  });
  tombstones_.insert(cmd.id);
  ++clock_;
  return {clock_, Opcode::kDelete, {cmd.id}};
}

void KernelState::check_link(const LinkCmd& cmd) const {
  if (cmd.a == cmd.b) {
    throw Error(Errc::kSelfLink, "link(" + std::to_string(cmd.a) + ", itself)");
  }
  for (VectorId id : {cmd.a, cmd.b}) {
    if (!vectors_.contains(id)) {
      throw Error(Errc::kUnknownId,
                  "link endpoint " + std::to_string(id) + " is not live");
    }
  }
}

ApplyReceipt KernelState::apply_link(const LinkCmd& cmd) {
  const Link canonical = std::minmax(cmd.a, cmd.b);
  links_.insert(canonical);
  ++clock_;
  return {clock_, Opcode::kLink, {canonical.first, canonical.second}};
}

std::pair<KernelState, ApplyReceipt> apply(KernelState state,
                                           const Command& cmd) {
  ApplyReceipt receipt = state.apply(cmd);
  return {std::move(state), std::move(receipt)};
}

hnsw::SearchResult query(const KernelState& state, const FixedVector& q,
                         std::size_t k) {
  return query(state, q, k, state.config().hnsw.ef_search);
}

hnsw::SearchResult query(const KernelState& state, const FixedVector& q,
                         std::size_t k, std::size_t ef_search) {
  if (q.dim() != state.config().dim) {
    throw Error(Errc::kDimensionMismatch,
                "query dim " + std::to_string(q.dim()) + ", kernel dim " +
                    std::to_string(state.config().dim));
  }
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  return state.index().search(q.coords(), k, ef_search, state.vectors());
}

Digest state_hash(const KernelState& state) {
  return sha256(snapshot::serialize(state));
}

}  // namespace valori
