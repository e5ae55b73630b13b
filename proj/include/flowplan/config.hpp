#ifndef FLOWPLAN_CONFIG_HPP
#define FLOWPLAN_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "flowplan/cbf.hpp"

namespace flowplan {

// Everything a planning run depends on. Two runs with equal configs
// (seed included) produce bit-identical records and traces.
struct RunConfig {
  std::uint64_t seed = 0;
  int dim = 2;
  int horizon = 31;        // waypoints - 1, at most 255
  int t_pred = 1;          // prediction Euler steps
  int t_corr = 256;        // correction Euler steps
  double alpha = 2.0;      // correction time scale, >= 1
  CbfParams cbf;
  std::string field = "gmm";           // "gmm" or "mlp:<checkpoint path>"
  std::string environment = "corridor";
  bool safety = true;      // false disables the filter (diagnostics only)

  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);

// Fields present in the JSON object override the given base; unknown keys
// are rejected so typos fail loudly.
RunConfig merge_config(const RunConfig& base, const nlohmann::json& overrides);

// FNV-1a over the canonical serialization with the seed zeroed out, so all
// seeds of one configuration share a hash. 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace flowplan

#endif  // FLOWPLAN_CONFIG_HPP
