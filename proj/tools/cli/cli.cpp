#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "valori/error.hpp"
#include "valori/io/npy.hpp"
#include "valori/io/records.hpp"
#include "valori/replay_log.hpp"
#include "valori/snapshot.hpp"

namespace valori::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRed = "\033[31m";
constexpr const char* kGreen = "\033[32m";
constexpr const char* kReset = "\033[0m";

struct ConfigFlags {
  std::uint32_t dim = 384;
  std::uint32_t m = 16;
  std::uint32_t ef_construction = 128;
  std::uint32_t ef_search = 64;
  std::string precision = "q16.16";
  CLI::Option* dim_opt = nullptr;
  CLI::Option* m_opt = nullptr;
  CLI::Option* efc_opt = nullptr;
  CLI::Option* efs_opt = nullptr;

  bool any_given() const {
    return dim_opt->count() + m_opt->count() + efc_opt->count() + efs_opt->count() > 0;
  }

  KernelConfig config() const {
    KernelConfig c;
    c.dim = dim;
    c.hnsw = {m, ef_construction, ef_search};
    if (precision == "q32.32") c.precision = PrecisionContract::kQ32_32;
    if (precision == "q64.64") c.precision = PrecisionContract::kQ64_64;
    c.validate();
    return c;
  }
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  f.dim_opt = app->add_option("--dim", f.dim, "Vector dimension")->check(CLI::Range(1, 65536));
  f.m_opt = app->add_option("--m", f.m, "HNSW neighbours per node per layer")
                ->check(CLI::PositiveNumber);
  f.efc_opt = app->add_option("--ef-construction", f.ef_construction,
                              "HNSW candidate list size during insert")
                  ->check(CLI::PositiveNumber);
  f.efs_opt = app->add_option("--ef-search", f.ef_search, "HNSW candidate list size for queries")
                  ->check(CLI::PositiveNumber);
  app->add_option("--precision", f.precision, "Precision contract")
      ->check(CLI::IsMember({"q16.16", "q32.32", "q64.64"}));
}

std::string config_line(const KernelConfig& c) {
  return "dim=" + std::to_string(c.dim) + " m=" + std::to_string(c.hnsw.m) +
         " ef_construction=" + std::to_string(c.hnsw.ef_construction) +
         " ef_search=" + std::to_string(c.hnsw.ef_search) +
         " precision=" + std::string(precision_name(c.precision));
}

KernelState load_snapshot(const fs::path& path) {
  return snapshot::deserialize(snapshot::read_file(path));
}

replay::ReplayResult replay_with_base(const fs::path& log_path,
                                      const std::optional<fs::path>& base) {
  const auto log = replay::read_log_file(log_path);
  std::optional<KernelState> initial;
  if (base) initial = load_snapshot(*base);
  return replay::replay(log, std::move(initial));
}

class Painter {
 public:
  explicit Painter(Terminal t) : t_(t) {}
  std::string operator()(const char* color, const std::string& text) const {
    return t_.color ? std::string(color) + text + kReset : text;
  }

 private:
  Terminal t_;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kUnimplemented:
      return kUsageError;
    default:
      return kFormatError;
  }
}

// ---- subcommands -------------------------------------------------------

struct IngestArgs {
  fs::path input;
  fs::path log;
  std::string format;
  std::string sync = "per-record";
  ConfigFlags flags;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const io::InputFormat format =
      a.format.empty()   ? io::format_from_path(a.input)
      : a.format == "csv" ? io::InputFormat::kCsv
      : a.format == "npy" ? io::InputFormat::kNpy
                          : io::InputFormat::kJsonl;
  auto records = io::load_records(a.input, format);

  const bool extend = fs::exists(a.log);
  KernelConfig config = a.flags.config();
  std::optional<KernelState> state;
  if (extend) {
    auto log = replay::read_log_file(a.log);
    if (a.flags.any_given() && !(log.config == config)) {
      throw Error(Errc::kConfigMismatch, "flags (" + config_line(config) + ") differ from " +
                                             a.log.string() + " (" + config_line(log.config) +
                                             ")");
    }
    config = log.config;
    state = replay::replay(log).state;
  } else {
    if (!a.flags.dim_opt->count() && !records.empty()) {
      config.dim = static_cast<std::uint32_t>(records.front().coords.size());
      config.validate();
    }
    state.emplace(config);
  }

  const auto cmds = io::to_insert_commands(std::move(records), config.dim);
  // Validate the whole batch before the log sees any of it.
  for (const auto& c : cmds) state->apply(c);

  const auto policy =
      a.sync == "batched" ? replay::SyncPolicy::kBatched : replay::SyncPolicy::kPerRecord;
  auto writer = extend ? replay::LogWriter::open(a.log, config, policy)
                       : replay::LogWriter::create(a.log, config, policy);
  for (const auto& c : cmds) writer.append(c);
  writer.sync();

  out << "ingested " << cmds.size() << " records into " << a.log.string() << "\n"
      << "config " << config_line(config) << "\n"
      << "clock " << state->clock() << "\n"
      << "state_hash " << state_hash(*state).hex() << "\n";
  return kOk;
}

struct QueryArgs {
  fs::path snapshot;
  std::string vector;
  fs::path query_file;
  std::size_t row = 0;
  std::size_t k = 10;
  std::optional<std::size_t> ef;
};

std::vector<double> query_row(const fs::path& path, std::size_t row) {
  if (path.extension() == ".npy") {
    const auto arr = io::load_npy(path);
    if (row >= arr.rows) {
      throw Error(Errc::kInvalidArgument, "row " + std::to_string(row) + " out of range (" +
                                              std::to_string(arr.rows) + " rows)");
    }
    std::vector<double> v(arr.cols);
    for (std::size_t c = 0; c < arr.cols; ++c) v[c] = arr.value(row, c);
    return v;
  }
  const std::string text = io::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0, seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    if (seen++ == row) return io::parse_float_list(line, line_no);
  }
  throw Error(Errc::kInvalidArgument, "row " + std::to_string(row) + " out of range");
}

int cmd_query(const QueryArgs& a, std::ostream& out) {
  const KernelState state = load_snapshot(a.snapshot);
  const std::vector<double> coords =
      a.vector.empty() ? query_row(a.query_file, a.row) : io::parse_float_list(a.vector);
  const FixedVector q = io::quantize(coords);
  const auto results =
      query(state, q, a.k, a.ef.value_or(state.config().hnsw.ef_search));
  out << "rank\tid\tdistance_raw\tdistance\n";
  std::size_t rank = 1;
  for (const auto& c : results) {
    out << rank++ << '\t' << c.id << '\t' << c.dist.raw << '\t' << to_decimal(c.dist) << '\n';
  }
  return kOk;
}

int cmd_snapshot(const fs::path& log, const fs::path& dest, const std::optional<fs::path>& base,
                 std::ostream& out) {
  const auto r = replay_with_base(log, base);
  const Bytes bytes = snapshot::serialize(r.state);
  snapshot::write_file(dest, bytes);
  out << "wrote " << dest.string() << " (" << bytes.size() << " bytes)\n"
      << "clock " << r.state.clock() << "\n"
      << "state_hash " << r.hash.hex() << "\n";
  return kOk;
}

int cmd_restore(const fs::path& path, std::ostream& out) {
  const Bytes bytes = snapshot::read_file(path);
  const KernelState s = snapshot::deserialize(bytes);
  out << "restored " << path.string() << "\n"
      << "config " << config_line(s.config()) << "\n"
      << "clock " << s.clock() << "\n"
      << "live " << s.vectors().size() << "\n"
      << "tombstones " << s.tombstones().size() << "\n"
      << "links " << s.links().size() << "\n"
      << "state_hash " << snapshot::content_hash(bytes).hex() << "\n";
  return kOk;
}

int cmd_hash(const fs::path& path, std::ostream& out) {
  const Bytes bytes = snapshot::read_file(path);
  if (bytes.size() >= 4 && std::equal(snapshot::kMagic.begin(), snapshot::kMagic.end(),
                                      bytes.begin())) {
    snapshot::deserialize(bytes);  // refuse to fingerprint a corrupt snapshot
  }
  out << snapshot::content_hash(bytes).hex() << "\n";
  return kOk;
}

int cmd_verify(const fs::path& log_path, const std::string& expected_hex,
               const std::optional<fs::path>& base, std::ostream& out, const Painter& paint) {
  const auto expected = Digest::from_hex(expected_hex);
  if (!expected) {
    throw Error(Errc::kInvalidArgument, "expected hash must be 64 lowercase hex digits");
  }
  std::optional<KernelState> initial;
  if (base) initial = load_snapshot(*base);
  const auto report = replay::verify(replay::read_log_file(log_path), *expected, std::move(initial));
  out << (report.pass ? paint(kGreen, "PASS") : paint(kRed, "FAIL")) << "\n"
      << "records " << report.record_count << "\n"
      << "clock " << report.clock << "\n"
      << "expected " << report.expected.hex() << "\n"
      << "actual   " << report.actual.hex() << "\n";
  return report.pass ? kOk : kMismatch;
}

struct BenchArgs {
  fs::path snapshot;
  fs::path queries;
  std::size_t count = 1000;
  std::size_t k = 10;
  std::optional<std::size_t> ef;
  std::uint64_t seed = 1;
  fs::path csv;
};

std::vector<FixedVector> bench_queries(const BenchArgs& a, std::uint32_t dim) {
  std::vector<FixedVector> out;
  if (!a.queries.empty()) {
    std::vector<io::InputRecord> rows;
    if (a.queries.extension() == ".npy") {
      rows = io::from_npy(io::load_npy(a.queries));
    } else {
      std::istringstream in(io::read_text_file(a.queries));
      std::string line;
      std::size_t n = 0;
      while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line[0] == '#' || line == "\r") continue;
        rows.push_back({0, io::parse_float_list(line, n), {}, n});
      }
    }
    if (rows.empty()) throw Error(Errc::kInvalidArgument, "query file has no rows");
    for (std::size_t i = 0; out.size() < a.count; ++i) {
      out.push_back(io::quantize(rows[i % rows.size()].coords));
    }
    return out;
  }
  // Seeded Gaussian directions, normalized. Only timings depend on these.
  std::mt19937_64 gen(a.seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  while (out.size() < a.count) {
    double norm = 0;
    for (auto& x : v) {
      x = normal(gen);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    out.push_back(io::quantize(v));
  }
  return out;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * sorted.size()));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const KernelState state = load_snapshot(a.snapshot);
  const std::size_t ef = a.ef.value_or(state.config().hnsw.ef_search);
  const auto queries = bench_queries(a, state.config().dim);

  // Reference pass, then the timed pass; the two must agree exactly.
  std::vector<hnsw::SearchResult> first;
  first.reserve(queries.size());
  for (const auto& q : queries) first.push_back(query(state, q, a.k, ef));

  std::vector<double> micros(queries.size());
  bool identical = true;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = query(state, queries[i], a.k, ef);
    const auto t1 = std::chrono::steady_clock::now();
    micros[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
    identical = identical && r == first[i];
  }

  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) throw Error(Errc::kIoFailure, "cannot write " + a.csv.string());
    csv << "query,latency_us,results\n";
    char buf[64];
    for (std::size_t i = 0; i < micros.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.3f", micros[i]);
      csv << i << ',' << buf << ',' << first[i].size() << '\n';
    }
  }

  std::vector<double> sorted = micros;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0;
  for (double m : micros) mean += m;
  if (!micros.empty()) mean /= static_cast<double>(micros.size());
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "vectors %zu\ndim %u\nqueries %zu\nk %zu\nef_search %zu\n"
                "p50_us %.1f\np95_us %.1f\np99_us %.1f\nmean_us %.1f\n",
                state.vectors().size(), state.config().dim, queries.size(), a.k, ef,
                percentile(sorted, 50), percentile(sorted, 95), percentile(sorted, 99), mean);
  out << buf;
  if (identical) {
    out << "determinism: results identical across 2 passes; only timings vary\n";
    return kOk;
  }
  out << "determinism: MISMATCH between passes\n";
  return kMismatch;
}

struct InspectArgs {
  fs::path file;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t count = 5;
};

int cmd_inspect_hex(const InspectArgs& a, std::ostream& out) {
  char buf[32];
  if (a.file.extension() == ".npy") {
    const auto arr = io::load_npy(a.file);
    if (a.row >= arr.rows || a.col + a.count > arr.cols) {
      throw Error(Errc::kInvalidArgument,
                  "requested row " + std::to_string(a.row) + " columns [" +
                      std::to_string(a.col) + ", " + std::to_string(a.col + a.count) +
                      ") outside a " + std::to_string(arr.rows) + "x" +
                      std::to_string(arr.cols) + " array");
    }
    for (std::size_t c = a.col; c < a.col + a.count; ++c) {
      if (arr.dtype == io::NpyDtype::kF32) {
        std::snprintf(buf, sizeof buf, "0x%08x", static_cast<std::uint32_t>(arr.bits(a.row, c)));
      } else {
        std::snprintf(buf, sizeof buf, "0x%016llx",
                      static_cast<unsigned long long>(arr.bits(a.row, c)));
      }
      out << buf << "\n";
    }
    return kOk;
  }
  // Text files: decimal literals rounded to the nearest float32.
  std::istringstream in(io::read_text_file(a.file));
  std::string line;
  std::size_t seen = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    if (seen++ != a.row) continue;
    const auto values = io::parse_float_list(line, line_no);
    if (a.col + a.count > values.size()) {
      throw Error(Errc::kInvalidArgument, "row has only " + std::to_string(values.size()) +
                                              " values");
    }
    std::istringstream fields(line);
    std::string field;
    std::size_t c = 0;
    while (std::getline(fields, field, ',')) {
      if (c >= a.col && c < a.col + a.count) {
        const float f = std::strtof(field.c_str(), nullptr);
        std::snprintf(buf, sizeof buf, "0x%08x", std::bit_cast<std::uint32_t>(f));
        out << buf << "\n";
      }
      ++c;
    }
    return kOk;
  }
  throw Error(Errc::kInvalidArgument, "row " + std::to_string(a.row) + " out of range");
}

}  // namespace

Terminal detect_terminal() {
  return {::isatty(STDOUT_FILENO) == 1 && std::getenv("VALORI_NO_COLOR") == nullptr};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        Terminal term) {
  const Painter paint(term);
  CLI::App app{"Deterministic fixed-point vector memory", "valori"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "valori 0.1.0");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Append vectors from CSV, JSONL or NPY to a log");
  ingest_cmd->add_option("input", ingest.input, "Input file")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--log", ingest.log, "Log file to create or extend")->required();
  ingest_cmd->add_option("--format", ingest.format, "Input format (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl", "npy"}));
  ingest_cmd->add_option("--sync", ingest.sync, "fsync policy")
      ->check(CLI::IsMember({"per-record", "batched"}));
  add_config_flags(ingest_cmd, ingest.flags);

  QueryArgs q;
  auto* query_cmd = app.add_subcommand("query", "k-NN query against a snapshot");
  query_cmd->add_option("snapshot", q.snapshot, "Snapshot file")->required()->check(CLI::ExistingFile);
  auto* vec_opt = query_cmd->add_option("--vector", q.vector, "Comma-separated coordinates");
  auto* file_opt = query_cmd->add_option("--query-file", q.query_file, "NPY or float CSV file")
                       ->check(CLI::ExistingFile);
  vec_opt->excludes(file_opt);
  query_cmd->add_option("--row", q.row, "Row of --query-file");
  query_cmd->add_option("-k,--k", q.k, "Results to return")->check(CLI::PositiveNumber);
  query_cmd->add_option("--ef", q.ef, "Search candidate list size")->check(CLI::PositiveNumber);

  fs::path snap_log, snap_out, single_path;
  std::optional<fs::path> base;
  auto* snap_cmd = app.add_subcommand("snapshot", "Replay a log and write a snapshot");
  snap_cmd->add_option("log", snap_log, "Log file")->required()->check(CLI::ExistingFile);
  snap_cmd->add_option("output", snap_out, "Snapshot file to write")->required();
  snap_cmd->add_option("--base", base, "Snapshot the log starts from");

  auto* restore_cmd = app.add_subcommand("restore", "Load and validate a snapshot");
  restore_cmd->add_option("snapshot", single_path, "Snapshot file")->required()->check(CLI::ExistingFile);

  auto* hash_cmd = app.add_subcommand("hash", "SHA-256 of a file (snapshots are validated first)");
  hash_cmd->add_option("file", single_path, "File")->required()->check(CLI::ExistingFile);

  std::string expected;
  auto* verify_cmd = app.add_subcommand("verify", "Replay a log and compare its state hash");
  verify_cmd->add_option("log", snap_log, "Log file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("expected", expected, "Expected state hash")->required();
  verify_cmd->add_option("--base", base, "Snapshot the log starts from");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Query latency percentiles");
  bench_cmd->add_option("snapshot", bench.snapshot, "Snapshot file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--queries", bench.queries, "NPY or float CSV query file")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--count", bench.count, "Number of timed queries")
      ->check(CLI::Range(std::size_t{1000}, std::size_t{10000000}));
  bench_cmd->add_option("-k,--k", bench.k, "Results per query")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--ef", bench.ef, "Search candidate list size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Seed for generated queries");
  bench_cmd->add_option("--csv", bench.csv, "Write per-query latencies as CSV");

  InspectArgs inspect;
  auto* inspect_cmd =
      app.add_subcommand("inspect-hex", "Print IEEE-754 bit patterns of stored floats");
  inspect_cmd->add_option("file", inspect.file, "NPY or float CSV file")->required()->check(CLI::ExistingFile);
  inspect_cmd->add_option("--row", inspect.row, "Row index");
  inspect_cmd->add_option("--col", inspect.col, "First column");
  inspect_cmd->add_option("--count", inspect.count, "Number of values")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (*query_cmd && q.vector.empty() && q.query_file.empty()) {
      throw CLI::RequiredError("--vector or --query-file");
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*query_cmd) return cmd_query(q, out);
    if (*snap_cmd) return cmd_snapshot(snap_log, snap_out, base, out);
    if (*restore_cmd) return cmd_restore(single_path, out);
    if (*hash_cmd) return cmd_hash(single_path, out);
    if (*verify_cmd) return cmd_verify(snap_log, expected, base, out, paint);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*inspect_cmd) return cmd_inspect_hex(inspect, out);
  } catch (const Error& e) {
    err << paint(kRed, "error") << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kUsageError;
}

}  // namespace valori::cli
