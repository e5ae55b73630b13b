#ifndef FLOWPLAN_SERIALIZE_HPP
#define FLOWPLAN_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowplan/certificates.hpp"
#include "flowplan/config.hpp"
#include "flowplan/environment.hpp"
#include "flowplan/integrate.hpp"
#include "flowplan/metrics.hpp"
#include "flowplan/mlp.hpp"

namespace flowplan {

inline constexpr int kSchemaVersion = 1;

// 17 significant digits: enough for doubles to round-trip through text
std::string format_double(double x);

// whole-file helpers; writes go to a temp file first, then rename
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);
void make_dirs(const std::string& path);

// parse with malformed-input and schema-version errors kept distinct
nlohmann::json parse_json(const std::string& text, const std::string& origin);
void require_schema(const nlohmann::json& j, const std::string& origin);

// environments/<name>.json
nlohmann::json env_to_json(const Environment& env);
Environment env_from_json(const nlohmann::json& j);
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

// datasets/<name>.json
nlohmann::json dataset_to_json(const PathDataset& dataset);
PathDataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const PathDataset& dataset, const std::string& path);
PathDataset load_dataset(const std::string& path);

nlohmann::json gmm_to_json(const GmmTarget& gmm);
GmmTarget gmm_from_json(const nlohmann::json& j);

// model checkpoint with the trainer's generator state
struct MlpCheckpoint {
  MlpField model;
  std::uint64_t rng_key = 0;
  std::uint64_t rng_counter = 0;
};

nlohmann::json checkpoint_to_json(const MlpCheckpoint& ckpt);
MlpCheckpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const MlpCheckpoint& ckpt, const std::string& path);
MlpCheckpoint load_checkpoint(const std::string& path);

// runs/<run-id>/config.json
void save_config(const RunConfig& cfg, const std::string& path);
RunConfig load_config(const std::string& path);

// runs/<run-id>/trace.csv: one row per snapshot and waypoint with columns
// t, k, coordinates, barrier values, then filter outputs when a filter ran
std::string trace_to_csv(const CorrectionTrace& trace);
CorrectionTrace trace_from_csv(const std::string& text);

// runs/<run-id>/record.csv: deterministic metrics only; measured timing goes
// to a separate timing.csv so records replay bit for bit
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);
std::string timing_to_csv(const std::vector<RunRecord>& records);

// runs/<run-id>/report.json
nlohmann::json report_to_json(const CertificateReport& report);
CertificateReport report_from_json(const nlohmann::json& j);
void save_report(const CertificateReport& report, const std::string& path);
CertificateReport load_report(const std::string& path);

// run directory name: run-<config hash>-s<seed>
std::string run_id(const RunConfig& cfg);

}  // namespace flowplan

#endif  // FLOWPLAN_SERIALIZE_HPP
