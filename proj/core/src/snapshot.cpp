#include "valori/snapshot.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>

#include "valori/error.hpp"

namespace valori {

namespace {

constexpr std::array<std::string_view, 5> kSectionNames = {
    "vectors", "metadata", "links", "tombstones", "graph"};

[[noreturn]] void integrity(const std::string& what) {
  throw Error(Errc::kIntegrityViolation, what);
}

[[noreturn]] void corrupt(const ByteReader& r, const std::string& what) {
  throw Error(Errc::kCorruptSection,
              r.context() + ": " + what + " at offset " + std::to_string(r.offset()),
              r.offset(), r.context());
}

// Rejects element counts that cannot fit in the remaining bytes before any
// allocation is sized from them.
void require_elements(const ByteReader& r, std::uint64_t count,
                      std::uint64_t min_element_size) {
  if (min_element_size != 0 && count > r.remaining() / min_element_size) {
    corrupt(r, "element count " + std::to_string(count) + " exceeds section size");
  }
}

void write_section(ByteWriter& out, std::uint8_t id, const ByteWriter& body) {
  out.put_u8(id);
  out.put_u64(body.size());
  out.put_bytes(body.bytes());
}

// Returns a reader over the body of section `index` (0-based).
ByteReader open_section(ByteReader& r, std::size_t index,
                        std::span<const std::uint8_t> all) {
  const std::string name(kSectionNames[index]);
  ByteReader frame(all.subspan(r.position()), Errc::kCorruptSection, name,
                   r.offset());
  const std::uint8_t id = frame.get_u8();
  if (id != index + 1) {
    throw Error(Errc::kCorruptSection,
                name + ": expected section id " + std::to_string(index + 1) +
                    ", found " + std::to_string(id),
                r.offset(), name);
  }
  const std::uint64_t length = frame.get_u64();
  if (length > frame.remaining()) {
    throw Error(Errc::kCorruptSection,
                name + ": body length " + std::to_string(length) +
                    " runs past end of input",
                frame.offset(), name);
  }
  const std::size_t body_offset = frame.offset();
  r.get_bytes(1 + 8);
  auto body = r.get_bytes(static_cast<std::size_t>(length));
  return ByteReader(body, Errc::kCorruptSection, name, body_offset);
}

void close_section(const ByteReader& body) {
  if (!body.at_end()) corrupt(body, "trailing bytes in section");
}

}  // namespace

class SnapshotCodec {
 public:
  static Bytes serialize(const KernelState& s);
  static KernelState deserialize(std::span<const std::uint8_t> bytes);
};

Bytes SnapshotCodec::serialize(const KernelState& s) {
  const KernelConfig& cfg = s.config_;
  ByteWriter out;
  for (char c : snapshot::kMagic) out.put_u8(static_cast<std::uint8_t>(c));
  out.put_u16(snapshot::kVersion);
  out.put_u8(static_cast<std::uint8_t>(cfg.precision));
  out.put_u32(cfg.dim);
  out.put_u32(cfg.hnsw.m);
  out.put_u32(cfg.hnsw.ef_construction);
  out.put_u32(cfg.hnsw.ef_search);
  out.put_u64(s.clock_);
  out.put_u32(snapshot::kSectionCount);

  {
    ByteWriter body;
    body.put_u32(static_cast<std::uint32_t>(s.vectors_.size()));
    for (const auto& [id, v] : s.vectors_) {
      body.put_u64(id);
      for (Fixed32 c : v.coords()) body.put_i32(c.raw);
    }
    write_section(out, 1, body);
  }
  {
    ByteWriter body;
    body.put_u32(static_cast<std::uint32_t>(s.metadata_.size()));
    for (const auto& [id, meta] : s.metadata_) {
      body.put_u64(id);
      body.put_u32(static_cast<std::uint32_t>(meta.size()));
      body.put_bytes(meta);
    }
    write_section(out, 2, body);
  }
  {
    ByteWriter body;
    body.put_u32(static_cast<std::uint32_t>(s.links_.size()));
    for (const auto& [a, b] : s.links_) {
      body.put_u64(a);
      body.put_u64(b);
    }
    write_section(out, 3, body);
  }
  {
    ByteWriter body;
    body.put_u32(static_cast<std::uint32_t>(s.tombstones_.size()));
    for (VectorId id : s.tombstones_) body.put_u64(id);
    write_section(out, 4, body);
  }
  {
    const hnsw::Graph& g = s.index_;
    ByteWriter body;
    body.put_u8(g.entry_point() ? 1 : 0);
    body.put_u64(g.entry_point().value_or(0));
    body.put_u32(g.max_level());
    if (g.entry_point()) {
      for (unsigned layer = 0; layer <= g.max_level(); ++layer) {
        std::uint32_t count = 0;
        for (const auto& [id, node] : g.nodes()) {
          if (node.layers.size() > layer) ++count;
        }
        body.put_u32(count);
        for (const auto& [id, node] : g.nodes()) {
          if (node.layers.size() <= layer) continue;
          body.put_u64(id);
          const auto& list = node.layers[layer];
          body.put_u32(static_cast<std::uint32_t>(list.size()));
          for (VectorId nb : list) body.put_u64(nb);
        }
      }
    }
    write_section(out, 5, body);
  }
  return std::move(out).take();
}

KernelState SnapshotCodec::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < snapshot::kMagic.size() ||
      !std::equal(snapshot::kMagic.begin(), snapshot::kMagic.end(), bytes.begin())) {
    throw Error(Errc::kBadMagic, "not a VKS1 snapshot", 0, "header");
  }
  ByteReader r(bytes, Errc::kCorruptSection, "header");
  r.get_bytes(snapshot::kMagic.size());
  const std::uint16_t version = r.get_u16();
  if (version != snapshot::kVersion) {
    throw Error(Errc::kUnsupportedVersion,
                "snapshot version " + std::to_string(version), 4, "header");
  }
  const std::uint8_t precision = r.get_u8();
  if (precision != static_cast<std::uint8_t>(PrecisionContract::kQ16_16)) {
    throw Error(Errc::kUnsupportedPrecision,
                "precision tag " + std::to_string(precision), 6, "header");
  }
  KernelConfig cfg;
  cfg.precision = PrecisionContract::kQ16_16;
  cfg.dim = r.get_u32();
  cfg.hnsw.m = r.get_u32();
  cfg.hnsw.ef_construction = r.get_u32();
  cfg.hnsw.ef_search = r.get_u32();
  const std::uint64_t clock = r.get_u64();
  const std::uint32_t section_count = r.get_u32();
  if (section_count != snapshot::kSectionCount) {
    corrupt(r, "section_count " + std::to_string(section_count));
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(Errc::kCorruptSection, std::string("header: ") + e.what(), 7,
                "header");
  }

  KernelState s(cfg);
  s.clock_ = clock;

  {
    ByteReader body = open_section(r, 0, bytes);
    const std::uint32_t count = body.get_u32();
    require_elements(body, count, 8 + 4ull * cfg.dim);
    std::vector<std::int32_t> raw(cfg.dim);
    for (std::uint32_t i = 0; i < count; ++i) {
      const VectorId id = body.get_u64();
      if (!s.vectors_.empty() && s.vectors_.rbegin()->first >= id) {
        integrity("vectors: ids not strictly ascending at id " + std::to_string(id));
      }
      for (auto& c : raw) c = body.get_i32();
      s.vectors_.emplace_hint(s.vectors_.end(), id, FixedVector::from_raw(raw));
    }
    close_section(body);
  }
  {
    ByteReader body = open_section(r, 1, bytes);
    const std::uint32_t count = body.get_u32();
    require_elements(body, count, 12);
    if (count != s.vectors_.size()) {
      integrity("metadata: entry count differs from vector count");
    }
    auto vit = s.vectors_.begin();
    for (std::uint32_t i = 0; i < count; ++i, ++vit) {
      const VectorId id = body.get_u64();
      if (id != vit->first) {
        integrity("metadata: id " + std::to_string(id) + " out of order or not live");
      }
      const std::uint32_t len = body.get_u32();
      if (len > kMaxMetadataBytes) integrity("metadata: entry exceeds 64 KiB");
      auto data = body.get_bytes(len);
      s.metadata_.emplace_hint(s.metadata_.end(), id, Bytes(data.begin(), data.end()));
    }
    close_section(body);
  }
  {
    ByteReader body = open_section(r, 2, bytes);
    const std::uint32_t count = body.get_u32();
    require_elements(body, count, 16);
    for (std::uint32_t i = 0; i < count; ++i) {
      const VectorId a = body.get_u64();
      const VectorId b = body.get_u64();
      if (a >= b) integrity("links: pair not canonical (a < b)");
      if (!s.links_.empty() && *s.links_.rbegin() >= Link{a, b}) {
        integrity("links: pairs not strictly ascending");
      }
      if (!s.vectors_.contains(a) || !s.vectors_.contains(b)) {
        integrity("links: endpoint not live");
      }
      s.links_.emplace_hint(s.links_.end(), a, b);
    }
    close_section(body);
  }
  {
    ByteReader body = open_section(r, 3, bytes);
    const std::uint32_t count = body.get_u32();
    require_elements(body, count, 8);
    for (std::uint32_t i = 0; i < count; ++i) {
      const VectorId id = body.get_u64();
      if (!s.tombstones_.empty() && *s.tombstones_.rbegin() >= id) {
        integrity("tombstones: ids not strictly ascending");
      }
      if (s.vectors_.contains(id)) integrity("tombstones: id is also live");
      s.tombstones_.insert(s.tombstones_.end(), id);
    }
    close_section(body);
  }
  {
    ByteReader body = open_section(r, 4, bytes);
    const std::uint8_t has_entry = body.get_u8();
    const VectorId entry = body.get_u64();
    const std::uint32_t max_level = body.get_u32();
    if (has_entry > 1) corrupt(body, "entry flag must be 0 or 1");
    if (!has_entry && (entry != 0 || max_level != 0)) {
      integrity("graph: empty graph with non-zero entry fields");
    }
    if (max_level > hnsw::kMaxLevel) integrity("graph: max_level above cap");

    std::map<VectorId, hnsw::Node> nodes;
    const unsigned layers = has_entry ? max_level + 1 : 0;
    for (unsigned layer = 0; layer < layers; ++layer) {
      const std::uint32_t count = body.get_u32();
      require_elements(body, count, 12);
      VectorId prev = 0;
      for (std::uint32_t i = 0; i < count; ++i) {
        const VectorId id = body.get_u64();
        if (i > 0 && id <= prev) integrity("graph: node ids not strictly ascending");
        prev = id;
        const std::uint32_t degree = body.get_u32();
        require_elements(body, degree, 8);
        std::vector<VectorId> list(degree);
        for (auto& nb : list) nb = body.get_u64();

        auto& node = nodes[id];
        if (node.layers.size() != layer) {
          integrity("graph: node " + std::to_string(id) + " skips a layer");
        }
        node.layers.push_back(std::move(list));
      }
    }
    close_section(body);

    std::optional<VectorId> entry_opt;
    if (has_entry) entry_opt = entry;
    s.index_ = hnsw::Graph::from_parts(cfg.hnsw, entry_opt, max_level, std::move(nodes));
    s.index_.validate(s.vectors_);
  }
  if (!r.at_end()) corrupt(r, "trailing bytes after last section");

  // Every live id cost one insert, every tombstone an insert and a delete,
  // every surviving link one link command.
  const std::uint64_t min_clock =
      s.vectors_.size() + 2 * s.tombstones_.size() + s.links_.size();
  if (s.clock_ < min_clock) integrity("clock smaller than the commands the state implies");
  return s;
}

namespace snapshot {

Bytes serialize(const KernelState& state) { return SnapshotCodec::serialize(state); }

KernelState deserialize(std::span<const std::uint8_t> bytes) {
  return SnapshotCodec::deserialize(bytes);
}

Digest content_hash(std::span<const std::uint8_t> bytes) { return sha256(bytes); }

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::kIoFailure, "read failed: " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIoFailure, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::kIoFailure, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIoFailure, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace snapshot
}  // namespace valori
