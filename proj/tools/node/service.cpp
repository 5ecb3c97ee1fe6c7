#include "service.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "valori/error.hpp"
#include "valori/io/base64.hpp"
#include "valori/io/records.hpp"
#include "valori/snapshot.hpp"

namespace valori::node {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int status_for(Errc code) {
  switch (code) {
    case Errc::kDuplicateId:
    case Errc::kConfigMismatch:
      return 409;
    case Errc::kUnknownId:
      return 404;
    case Errc::kNonFiniteInput:
    case Errc::kBadMagic:
    case Errc::kUnsupportedVersion:
    case Errc::kUnsupportedPrecision:
    case Errc::kCorruptSection:
    case Errc::kIntegrityViolation:
      return 422;
    case Errc::kIoFailure:
      return 500;
    default:
      return 400;
  }
}

Response error_response(const Error& e) {
  Response r;
  r.status = status_for(e.code());
  r.body = json{{"error", std::string(errc_name(e.code()))}, {"message", e.what()}}.dump();
  return r;
}

// Rewrites the bare NaN / Infinity / -Infinity tokens that many JSON
// encoders emit into strings, so they reach quantization and are rejected
// as non-finite rather than as malformed JSON.
std::string quote_nonfinite_tokens(std::string_view body) {
  std::string out;
  out.reserve(body.size() + 16);
  bool in_string = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < body.size()) {
        out += body[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    bool replaced = false;
    for (std::string_view token : {"-Infinity", "Infinity", "NaN"}) {
      if (body.substr(i, token.size()) == token) {
        out += '"';
        out += token;
        out += '"';
        i += token.size() - 1;
        replaced = true;
        break;
      }
    }
    if (!replaced) out += c;
  }
  return out;
}

json parse_object(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    j = json::parse(quote_nonfinite_tokens(body), nullptr, /*allow_exceptions=*/false);
  }
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Errc::kParseError, "request body must be a JSON object");
  }
  return j;
}

std::uint64_t get_id(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw Error(Errc::kParseError, std::string("\"") + key + "\" must be a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned() || j[key].get<std::uint64_t>() == 0) {
    throw Error(Errc::kParseError, std::string("\"") + key + "\" must be a positive integer");
  }
  return j[key].get<std::size_t>();
}

FixedVector get_vector(const json& j) {
  if (!j.contains("vector") || !j["vector"].is_array()) {
    throw Error(Errc::kParseError, "\"vector\" must be an array of numbers");
  }
  std::vector<double> coords;
  coords.reserve(j["vector"].size());
  for (const auto& x : j["vector"]) {
    if (x.is_number()) {
      coords.push_back(x.get<double>());
    } else if (x == "NaN") {
      coords.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (x == "Infinity" || x == "-Infinity") {
      coords.push_back(x == "Infinity" ? HUGE_VAL : -HUGE_VAL);
    } else {
      throw Error(Errc::kParseError, "\"vector\" must be an array of numbers");
    }
  }
  return io::quantize(coords);
}

fs::path default_base_path(const NodeOptions& o) {
  if (!o.snapshot_dir.empty()) return o.snapshot_dir / "base.vks";
  fs::path p = o.log_path;
  p += ".base.vks";
  return p;
}

}  // namespace

NodeService::NodeService(NodeOptions options)
    : options_(std::move(options)), state_(options_.config) {
  if (const auto base = base_snapshot_path(); base && fs::exists(*base)) {
    KernelState loaded = snapshot::deserialize(snapshot::read_file(*base));
    if (!(loaded.config() == options_.config)) {
      throw Error(Errc::kConfigMismatch, "base snapshot " + base->string() +
                                             " was written with a different configuration");
    }
    state_ = std::move(loaded);
  }
  if (!options_.log_path.empty()) {
    if (fs::exists(options_.log_path)) {
      const auto contents = replay::read_log_file(options_.log_path);
      state_ = replay::replay(contents, std::move(state_)).state;
      log_.emplace(replay::LogWriter::open(options_.log_path, options_.config, options_.sync));
    } else {
      log_.emplace(replay::LogWriter::create(options_.log_path, options_.config, options_.sync));
    }
  }
  hash_ = state_hash(state_);
}

std::optional<fs::path> NodeService::base_snapshot_path() const {
  if (options_.log_path.empty() && options_.snapshot_dir.empty()) return std::nullopt;
  return default_base_path(options_);
}

Digest NodeService::current_hash() const {
  std::shared_lock lock(state_mu_);
  return hash_;
}

std::uint64_t NodeService::clock() const {
  std::shared_lock lock(state_mu_);
  return state_.clock();
}

Response NodeService::state_summary(int status) const {
  Response r;
  r.status = status;
  r.body = json{{"clock", state_.clock()}, {"state_hash", hash_.hex()}}.dump();
  r.headers.emplace_back(kHashHeader, hash_.hex());
  return r;
}

Response NodeService::mutate(const Command& cmd) {
  std::lock_guard gate(writer_mu_);
  // Only this thread mutates state_, so reading it here without state_mu_
  // cannot race with another writer.
  try {
    state_.check(cmd);
  } catch (const Error& e) {
    return error_response(e);
  }
  try {
    if (log_) log_->append(cmd);
  } catch (const Error& e) {
    return error_response(e);
  }
  std::unique_lock lock(state_mu_);
  state_.apply(cmd);
  hash_ = state_hash(state_);
  return state_summary(200);
}

Response NodeService::insert(std::string_view body) {
  try {
    const json j = parse_object(body);
    InsertCmd cmd;
    cmd.id = get_id(j, "id");
    cmd.coords = get_vector(j);
    if (j.contains("metadata") && !j["metadata"].is_null()) {
      if (!j["metadata"].is_string()) {
        throw Error(Errc::kParseError, "\"metadata\" must be a base64 string");
      }
      cmd.metadata = io::base64_decode(j["metadata"].get<std::string>());
    }
    return mutate(cmd);
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response NodeService::remove(std::string_view body) {
  try {
    return mutate(DeleteCmd{get_id(parse_object(body), "id")});
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response NodeService::link(std::string_view body) {
  try {
    const json j = parse_object(body);
    return mutate(LinkCmd{get_id(j, "a"), get_id(j, "b")});
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response NodeService::query(std::string_view body) const {
  try {
    const json j = parse_object(body);
    const FixedVector q = get_vector(j);
    const std::size_t k = get_count(j, "k", 10);
    std::shared_lock lock(state_mu_);
    const std::size_t ef = get_count(j, "ef", state_.config().hnsw.ef_search);
    const auto results = valori::query(state_, q, k, ef);
    json list = json::array();
    for (const auto& c : results) {
      list.push_back({{"id", c.id},
                      {"distance", to_decimal(c.dist)},
                      {"distance_raw", std::to_string(c.dist.raw)}});
    }
    Response r;
    r.body = json{{"clock", state_.clock()}, {"state_hash", hash_.hex()}, {"results", list}}.dump();
    r.headers.emplace_back(kHashHeader, hash_.hex());
    return r;
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response NodeService::snapshot() const {
  std::shared_lock lock(state_mu_);
  Response r;
  const Bytes bytes = snapshot::serialize(state_);
  r.body.assign(bytes.begin(), bytes.end());
  r.content_type = "application/octet-stream";
  r.headers.emplace_back(kHashHeader, hash_.hex());
  return r;
}

Response NodeService::restore(std::span<const std::uint8_t> body) {
  std::optional<KernelState> incoming;
  try {
    incoming.emplace(snapshot::deserialize(body));
  } catch (const Error& e) {
    return error_response(e);
  }
  if (!(incoming->config() == options_.config)) {
    return error_response(Error(Errc::kConfigMismatch,
                                "snapshot configuration differs from this node's"));
  }
  std::lock_guard gate(writer_mu_);
  try {
    if (log_) {
      // The restored snapshot becomes the base; the log restarts empty on
      // top of it.
      const fs::path base = default_base_path(options_);
      if (!options_.snapshot_dir.empty()) fs::create_directories(options_.snapshot_dir);
      snapshot::write_file(base, body);
      fs::path fresh = options_.log_path;
      fresh += ".next";
      fs::remove(fresh);
      { auto w = replay::LogWriter::create(fresh, options_.config, options_.sync); }
      log_.reset();
      fs::rename(fresh, options_.log_path);
      log_.emplace(replay::LogWriter::open(options_.log_path, options_.config, options_.sync));
    }
  } catch (const Error& e) {
    return error_response(e);
  } catch (const fs::filesystem_error& e) {
    return error_response(Error(Errc::kIoFailure, e.what()));
  }
  const Digest digest = state_hash(*incoming);
  std::unique_lock lock(state_mu_);
  state_ = std::move(*incoming);
  hash_ = digest;
  return state_summary(200);
}

Response NodeService::hash() const {
  std::shared_lock lock(state_mu_);
  return state_summary(200);
}

Response NodeService::health() const {
  Response r;
  r.body = json{{"status", "ok"}}.dump();
  return r;
}

}  // namespace valori::node
