#include "flowplan/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << content;
    if (!out.good()) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

void make_dirs(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory: " + path);
}

nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw MalformedFileError("not valid JSON: " + origin);
  return j;
}

void require_schema(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw MalformedFileError("missing schema_version: " + origin);
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kSchemaVersion)
    throw SchemaVersionError("unsupported schema_version in " + origin);
}

namespace {

// json access that reports malformed artifacts instead of raw json errors
template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFileError(std::string("bad or missing field '") + key +
                             "': " + e.what());
  }
}

nlohmann::json vec2_to_json(const Eigen::Vector2d& v) {
  return nlohmann::json::array({v[0], v[1]});
}

Eigen::Vector2d vec2_from_json(const nlohmann::json& j, const char* key) {
  const auto arr = get_field<std::vector<double>>(j, key);
  if (arr.size() != 2)
    throw MalformedFileError(std::string("field '") + key +
                             "' must have 2 entries");
  return {arr[0], arr[1]};
}

nlohmann::json path_to_json(const Path& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < p.waypoints(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < p.dim(); ++i) row.push_back(p.data()(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Path path_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 2)
    throw MalformedFileError("path must be an array of >= 2 waypoints");
  const auto first = j.at(0).get<std::vector<double>>();
  Path p(static_cast<int>(first.size()), static_cast<int>(j.size()) - 1);
  for (int k = 0; k < p.waypoints(); ++k) {
    const auto row = j.at(static_cast<std::size_t>(k)).get<std::vector<double>>();
    if (row.size() != first.size())
      throw MalformedFileError("ragged path rows");
    for (int i = 0; i < p.dim(); ++i)
      p.data()(i, k) = row[static_cast<std::size_t>(i)];
  }
  p.check();
  return p;
}

nlohmann::json barrier_to_json(const BarrierSpec& spec) {
  return nlohmann::json{{"kind", barrier_kind_name(spec.kind)},
                        {"center", vec2_to_json(spec.center)},
                        {"ax", spec.ax},
                        {"ay", spec.ay},
                        {"roof", spec.roof},
                        {"vel_scale", spec.vel_scale},
                        {"pos_index", spec.pos_index},
                        {"vel_index", spec.vel_index}};
}

BarrierSpec barrier_from_json(const nlohmann::json& j) {
  BarrierSpec spec;
  spec.kind = barrier_kind_from_name(get_field<std::string>(j, "kind"));
  spec.center = vec2_from_json(j, "center");
  spec.ax = get_field<double>(j, "ax");
  spec.ay = get_field<double>(j, "ay");
  spec.roof = get_field<double>(j, "roof");
  spec.vel_scale = get_field<double>(j, "vel_scale");
  spec.pos_index = get_field<int>(j, "pos_index");
  spec.vel_index = get_field<int>(j, "vel_index");
  return spec;
}

double json_or_nan(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}

nlohmann::json nan_to_json(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

// minimal RFC-4180: quote a field only when it needs quoting
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw MalformedFileError("not a number: '" + s + "'");
  return value;
}

long long parse_int(const std::string& s) {
  long long value = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw MalformedFileError("not an integer: '" + s + "'");
  return value;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t value = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw MalformedFileError("not an unsigned integer: '" + s + "'");
  return value;
}

}  // namespace

nlohmann::json env_to_json(const Environment& env) {
  nlohmann::json barriers = nlohmann::json::array();
  for (const BarrierSpec& spec : env.barriers)
    barriers.push_back(barrier_to_json(spec));
  return nlohmann::json{
      {"schema_version", kSchemaVersion},
      {"name", env.name},
      {"bounds_min", vec2_to_json(env.bounds_min)},
      {"bounds_max", vec2_to_json(env.bounds_max)},
      {"barriers", std::move(barriers)},
      {"start", {{"center", vec2_to_json(env.start.center)},
                 {"radius", env.start.radius}}},
      {"goal", {{"center", vec2_to_json(env.goal.center)},
                {"radius", env.goal.radius}}},
      {"waypoints", env.waypoints},
      {"control_spread", env.control_spread},
      {"zeta", env.zeta}};
}

Environment env_from_json(const nlohmann::json& j) {
  Environment env;
  env.name = get_field<std::string>(j, "name");
  env.bounds_min = vec2_from_json(j, "bounds_min");
  env.bounds_max = vec2_from_json(j, "bounds_max");
  if (!j.contains("barriers") || !j.at("barriers").is_array())
    throw MalformedFileError("missing barriers array");
  for (const nlohmann::json& b : j.at("barriers"))
    env.barriers.push_back(barrier_from_json(b));
  const nlohmann::json& start = j.at("start");
  env.start.center = vec2_from_json(start, "center");
  env.start.radius = get_field<double>(start, "radius");
  const nlohmann::json& goal = j.at("goal");
  env.goal.center = vec2_from_json(goal, "center");
  env.goal.radius = get_field<double>(goal, "radius");
  env.waypoints = get_field<int>(j, "waypoints");
  env.control_spread = get_field<double>(j, "control_spread");
  env.zeta = get_field<double>(j, "zeta");
  return env;
}

void save_environment(const Environment& env, const std::string& path) {
  write_file_atomic(path, env_to_json(env).dump(2) + "\n");
}

Environment load_environment(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  require_schema(j, path);
  return env_from_json(j);
}

nlohmann::json dataset_to_json(const PathDataset& dataset) {
  nlohmann::json paths = nlohmann::json::array();
  for (const Path& p : dataset.paths) paths.push_back(path_to_json(p));
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"environment", dataset.environment},
                        {"generator_seed", dataset.generator_seed},
                        {"jitter_scale", dataset.jitter_scale},
                        {"paths", std::move(paths)}};
}

PathDataset dataset_from_json(const nlohmann::json& j) {
  PathDataset dataset;
  dataset.environment = get_field<std::string>(j, "environment");
  dataset.generator_seed = get_field<std::uint64_t>(j, "generator_seed");
  dataset.jitter_scale = get_field<double>(j, "jitter_scale");
  if (!j.contains("paths") || !j.at("paths").is_array())
    throw MalformedFileError("missing paths array");
  for (const nlohmann::json& p : j.at("paths"))
    dataset.paths.push_back(path_from_json(p));
  dataset.check();
  return dataset;
}

void save_dataset(const PathDataset& dataset, const std::string& path) {
  write_file_atomic(path, dataset_to_json(dataset).dump() + "\n");
}

PathDataset load_dataset(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  require_schema(j, path);
  return dataset_from_json(j);
}

nlohmann::json gmm_to_json(const GmmTarget& gmm) {
  nlohmann::json means = nlohmann::json::array();
  for (const Path& m : gmm.means) means.push_back(path_to_json(m));
  return nlohmann::json{{"weights", gmm.weights},
                        {"means", std::move(means)},
                        {"stds", gmm.stds}};
}

GmmTarget gmm_from_json(const nlohmann::json& j) {
  GmmTarget gmm;
  gmm.weights = get_field<std::vector<double>>(j, "weights");
  gmm.stds = get_field<std::vector<double>>(j, "stds");
  if (!j.contains("means") || !j.at("means").is_array())
    throw MalformedFileError("missing means array");
  for (const nlohmann::json& m : j.at("means"))
    gmm.means.push_back(path_from_json(m));
  gmm.validate();
  return gmm;
}

nlohmann::json checkpoint_to_json(const MlpCheckpoint& ckpt) {
  ckpt.model.check();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const Eigen::MatrixXd& w : ckpt.model.weights) {
    nlohmann::json flat = nlohmann::json::array();
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(std::move(flat));
  }
  for (const Eigen::VectorXd& b : ckpt.model.biases) {
    nlohmann::json flat = nlohmann::json::array();
    for (int r = 0; r < b.size(); ++r) flat.push_back(b[r]);
    biases.push_back(std::move(flat));
  }
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"widths", ckpt.model.widths},
                        {"dim", ckpt.model.dim_},
                        {"waypoints", ckpt.model.waypoints_},
                        {"activation", ckpt.model.activation},
                        {"weights", std::move(weights)},
                        {"biases", std::move(biases)},
                        {"rng_state", {{"key", ckpt.rng_key},
                                       {"counter", ckpt.rng_counter}}}};
}

MlpCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  MlpCheckpoint ckpt;
  ckpt.model.widths = get_field<std::vector<int>>(j, "widths");
  ckpt.model.dim_ = get_field<int>(j, "dim");
  ckpt.model.waypoints_ = get_field<int>(j, "waypoints");
  ckpt.model.activation = get_field<std::string>(j, "activation");
  if (!j.contains("weights") || !j.contains("biases"))
    throw MalformedFileError("missing weights or biases");
  const nlohmann::json& weights = j.at("weights");
  const nlohmann::json& biases = j.at("biases");
  const std::size_t layers =
      ckpt.model.widths.empty() ? 0 : ckpt.model.widths.size() - 1;
  if (weights.size() != layers || biases.size() != layers)
    throw MalformedFileError("layer count does not match widths");
  for (std::size_t l = 0; l < layers; ++l) {
    const int rows = ckpt.model.widths[l + 1];
    const int cols = ckpt.model.widths[l];
    const auto flat = weights.at(l).get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != rows * cols)
      throw MalformedFileError("weight size mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    ckpt.model.weights.push_back(std::move(w));
    const auto bflat = biases.at(l).get<std::vector<double>>();
    if (static_cast<int>(bflat.size()) != rows)
      throw MalformedFileError("bias size mismatch");
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) b[r] = bflat[static_cast<std::size_t>(r)];
    ckpt.model.biases.push_back(std::move(b));
  }
  const nlohmann::json& rng = j.at("rng_state");
  ckpt.rng_key = get_field<std::uint64_t>(rng, "key");
  ckpt.rng_counter = get_field<std::uint64_t>(rng, "counter");
  ckpt.model.check();
  return ckpt;
}

void save_checkpoint(const MlpCheckpoint& ckpt, const std::string& path) {
  write_file_atomic(path, checkpoint_to_json(ckpt).dump() + "\n");
}

MlpCheckpoint load_checkpoint(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  require_schema(j, path);
  return checkpoint_from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  nlohmann::json j = cfg;
  j["schema_version"] = kSchemaVersion;
  write_file_atomic(path, j.dump(2) + "\n");
}

RunConfig load_config(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  require_schema(j, path);
  RunConfig cfg;
  try {
    cfg = j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFileError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

std::string trace_to_csv(const CorrectionTrace& trace) {
  trace.check();
  const int d = trace.final_path().dim();
  const int nb = trace.barrier_count();

  std::string out = "t,k";
  for (int i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
  for (int j = 1; j <= nb; ++j) out += ",b" + std::to_string(j);
  out += ",filtered,slack,lambda1,lambda2,degenerate\n";

  for (const CorrectionSnapshot& snap : trace.snapshots) {
    const bool filtered = !snap.qp.empty();
    for (int k = 0; k < snap.path.waypoints(); ++k) {
      out += format_double(snap.t);
      out += ',' + std::to_string(k);
      for (int i = 0; i < d; ++i)
        out += ',' + format_double(snap.path.data()(i, k));
      for (int j = 0; j < nb; ++j)
        out += ',' + format_double(snap.barriers(j, k));
      if (filtered) {
        const WaypointQp& q = snap.qp[static_cast<std::size_t>(k)];
        out += ",1," + format_double(q.slack);
        out += ',' + format_double(q.multipliers[0]);
        out += ',' + format_double(q.multipliers[1]);
        out += q.degenerate ? ",1" : ",0";
      } else {
        out += ",0,0,0,0,0";
      }
      out += '\n';
    }
  }
  return out;
}

CorrectionTrace trace_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.size() < 2) throw MalformedFileError("trace CSV has no rows");
  const std::vector<std::string> header = csv_split(lines[0]);

  int d = 0, nb = 0;
  for (const std::string& h : header) {
    if (h.size() >= 2 && h[0] == 'x') ++d;
    if (h.size() >= 2 && h[0] == 'b') ++nb;
  }
  const std::size_t expected = 2 + static_cast<std::size_t>(d) +
                               static_cast<std::size_t>(nb) + 5;
  if (d < 1 || header.size() != expected)
    throw MalformedFileError("unrecognized trace CSV header");

  CorrectionTrace trace;
  std::vector<std::vector<std::string>> pending;  // rows of one snapshot
  auto flush = [&]() {
    if (pending.empty()) return;
    const int wp = static_cast<int>(pending.size());
    CorrectionSnapshot snap;
    snap.t = parse_double(pending[0][0]);
    snap.path = Path(d, wp - 1);
    snap.barriers.resize(nb, wp);
    const bool filtered = parse_int(pending[0][2 + d + nb]) != 0;
    if (filtered) snap.qp.resize(static_cast<std::size_t>(wp));
    for (int k = 0; k < wp; ++k) {
      const std::vector<std::string>& row = pending[static_cast<std::size_t>(k)];
      if (parse_int(row[1]) != k)
        throw MalformedFileError("trace CSV waypoint index out of order");
      for (int i = 0; i < d; ++i)
        snap.path.data()(i, k) = parse_double(row[static_cast<std::size_t>(2 + i)]);
      for (int j = 0; j < nb; ++j)
        snap.barriers(j, k) =
            parse_double(row[static_cast<std::size_t>(2 + d + j)]);
      if (filtered) {
        WaypointQp& q = snap.qp[static_cast<std::size_t>(k)];
        const std::size_t base = static_cast<std::size_t>(2 + d + nb);
        q.slack = parse_double(row[base + 1]);
        q.multipliers[0] = parse_double(row[base + 2]);
        q.multipliers[1] = parse_double(row[base + 3]);
        q.degenerate = parse_int(row[base + 4]) != 0;
      }
    }
    trace.snapshots.push_back(std::move(snap));
    pending.clear();
  };

  std::string current_t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> row = csv_split(lines[i]);
    if (row.size() != expected)
      throw MalformedFileError("trace CSV row has wrong width");
    if (row[0] != current_t) {
      flush();
      current_t = row[0];
    }
    pending.push_back(std::move(row));
  }
  flush();
  trace.check();
  return trace;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ValidationError("no records to write");
  const std::size_t nb = records[0].min_barrier.size();
  std::string out = "seed,config_hash";
  for (std::size_t j = 1; j <= nb; ++j)
    out += ",min_b" + std::to_string(j);
  out += ",score,trap,curvature,acceleration,convergence_time\n";
  for (const RunRecord& r : records) {
    if (r.min_barrier.size() != nb)
      throw ValidationError("records disagree on barrier count");
    out += std::to_string(r.seed);
    out += ',' + csv_quote(r.config_hash);
    for (double b : r.min_barrier) out += ',' + format_double(b);
    out += ',' + format_double(r.score);
    out += r.trap ? ",1" : ",0";
    out += ',' + format_double(r.curvature);
    out += ',' + format_double(r.acceleration);
    out += ',' + format_double(r.convergence_time);
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.empty()) throw MalformedFileError("record CSV has no header");
  const std::vector<std::string> header = csv_split(lines[0]);
  std::size_t nb = 0;
  for (const std::string& h : header)
    if (h.rfind("min_b", 0) == 0) ++nb;
  if (header.size() != 2 + nb + 5)
    throw MalformedFileError("unrecognized record CSV header");

  std::vector<RunRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> row = csv_split(lines[i]);
    if (row.size() != header.size())
      throw MalformedFileError("record CSV row has wrong width");
    RunRecord r;
    r.seed = parse_u64(row[0]);
    r.config_hash = row[1];
    for (std::size_t j = 0; j < nb; ++j)
      r.min_barrier.push_back(parse_double(row[2 + j]));
    r.score = parse_double(row[2 + nb]);
    r.trap = parse_int(row[3 + nb]) != 0;
    r.curvature = parse_double(row[4 + nb]);
    r.acceleration = parse_double(row[5 + nb]);
    r.convergence_time = parse_double(row[6 + nb]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string timing_to_csv(const std::vector<RunRecord>& records) {
  std::string out = "seed,time_per_step_ms\n";
  for (const RunRecord& r : records) {
    out += std::to_string(r.seed);
    out += ',' + format_double(r.time_per_step_ms);
    out += '\n';
  }
  return out;
}

nlohmann::json report_to_json(const CertificateReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const WaypointCertificate& r : report.rows) {
    rows.push_back(nlohmann::json{{"barrier", r.barrier},
                                  {"waypoint", r.waypoint},
                                  {"b_at_tw", r.b_at_tw},
                                  {"bound", r.bound},
                                  {"reach_time", nan_to_json(r.reach_time)},
                                  {"reached", r.reached},
                                  {"invariant", r.invariant},
                                  {"comparison_ok", r.comparison_ok},
                                  {"max_post_reach_drop",
                                   r.max_post_reach_drop}});
  }
  nlohmann::json violations = nlohmann::json::array();
  for (const CertificateViolation& v : report.violations) {
    violations.push_back(nlohmann::json{{"kind", v.kind},
                                        {"barrier", v.barrier},
                                        {"waypoint", v.waypoint},
                                        {"snapshot", v.snapshot},
                                        {"time", v.time},
                                        {"value", v.value},
                                        {"limit", v.limit}});
  }
  return nlohmann::json{
      {"schema_version", kSchemaVersion},
      {"pass", report.pass},
      {"tolerance", report.tolerance},
      {"rows", std::move(rows)},
      {"violations", std::move(violations)},
      {"trap", {{"trapped", report.trap.trapped},
                {"segments", report.trap.segments}}},
      {"envelope", {{"fitted", report.envelope.fitted},
                    {"c1", report.envelope.c1},
                    {"c2", report.envelope.c2},
                    {"max_excess", report.envelope.max_excess}}},
      {"max_reach_time", nan_to_json(report.max_reach_time)}};
}

CertificateReport report_from_json(const nlohmann::json& j) {
  CertificateReport report;
  report.pass = get_field<bool>(j, "pass");
  report.tolerance = get_field<std::vector<double>>(j, "tolerance");
  try {
    for (const nlohmann::json& r : j.at("rows")) {
      WaypointCertificate row;
      row.barrier = get_field<int>(r, "barrier");
      row.waypoint = get_field<int>(r, "waypoint");
      row.b_at_tw = get_field<double>(r, "b_at_tw");
      row.bound = get_field<double>(r, "bound");
      row.reach_time = json_or_nan(r, "reach_time");
      row.reached = get_field<bool>(r, "reached");
      row.invariant = get_field<bool>(r, "invariant");
      row.comparison_ok = get_field<bool>(r, "comparison_ok");
      row.max_post_reach_drop = get_field<double>(r, "max_post_reach_drop");
      report.rows.push_back(row);
    }
    for (const nlohmann::json& v : j.at("violations")) {
      CertificateViolation viol;
      viol.kind = get_field<std::string>(v, "kind");
      viol.barrier = get_field<int>(v, "barrier");
      viol.waypoint = get_field<int>(v, "waypoint");
      viol.snapshot = get_field<int>(v, "snapshot");
      viol.time = get_field<double>(v, "time");
      viol.value = get_field<double>(v, "value");
      viol.limit = get_field<double>(v, "limit");
      report.violations.push_back(viol);
    }
    const nlohmann::json& trap = j.at("trap");
    report.trap.trapped = get_field<bool>(trap, "trapped");
    report.trap.segments = get_field<std::vector<int>>(trap, "segments");
    const nlohmann::json& env = j.at("envelope");
    report.envelope.fitted = get_field<bool>(env, "fitted");
    report.envelope.c1 = get_field<double>(env, "c1");
    report.envelope.c2 = get_field<double>(env, "c2");
    report.envelope.max_excess = get_field<double>(env, "max_excess");
    report.max_reach_time = json_or_nan(j, "max_reach_time");
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFileError(std::string("bad report: ") + e.what());
  }
  return report;
}

void save_report(const CertificateReport& report, const std::string& path) {
  write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

CertificateReport load_report(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  require_schema(j, path);
  return report_from_json(j);
}

std::string run_id(const RunConfig& cfg) {
  return "run-" + config_hash(cfg) + "-s" + std::to_string(cfg.seed);
}

}  // namespace flowplan
