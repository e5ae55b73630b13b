#include "flowplan/config.hpp"

#include <cstdio>

#include "flowplan/errors.hpp"

namespace flowplan {

void RunConfig::validate() const {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (horizon < 1 || horizon > 255)
    throw ValidationError("horizon must lie in [1, 255]");
  if (t_pred < 1) throw ValidationError("t_pred must be >= 1");
  if (t_corr < 1) throw ValidationError("t_corr must be >= 1");
  if (!(alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
  cbf.validate(false);  // zeta 0 still means "environment default" here
  if (field.empty()) throw ValidationError("field identifier is empty");
  if (environment.empty())
    throw ValidationError("environment identifier is empty");
}

void to_json(nlohmann::json& j, const RunConfig& cfg) {
  j = nlohmann::json{{"seed", cfg.seed},
                     {"dim", cfg.dim},
                     {"horizon", cfg.horizon},
                     {"t_pred", cfg.t_pred},
                     {"t_corr", cfg.t_corr},
                     {"alpha", cfg.alpha},
                     {"field", cfg.field},
                     {"environment", cfg.environment},
                     {"safety", cfg.safety},
                     {"cbf",
                      {{"epsilon", cfg.cbf.epsilon},
                       {"rho", cfg.cbf.rho},
                       {"delta", cfg.cbf.delta},
                       {"t_w", cfg.cbf.t_w},
                       {"w0", cfg.cbf.w0},
                       {"zeta", cfg.cbf.zeta}}}};
}

void from_json(const nlohmann::json& j, RunConfig& cfg) {
  RunConfig base;
  cfg = merge_config(base, j);
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

RunConfig merge_config(const RunConfig& base, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const char* known[] = {"seed",  "dim",   "horizon",     "t_pred",
                                "t_corr", "alpha", "field",       "environment",
                                "safety", "cbf",   "schema_version"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ValidationError("unknown config key: " + item.key());
  }
  RunConfig cfg = base;
  take(j, "seed", cfg.seed);
  take(j, "dim", cfg.dim);
  take(j, "horizon", cfg.horizon);
  take(j, "t_pred", cfg.t_pred);
  take(j, "t_corr", cfg.t_corr);
  take(j, "alpha", cfg.alpha);
  take(j, "field", cfg.field);
  take(j, "environment", cfg.environment);
  take(j, "safety", cfg.safety);
  if (j.contains("cbf")) {
    const nlohmann::json& c = j.at("cbf");
    if (!c.is_object()) throw ValidationError("cbf must be a JSON object");
    static const char* cbf_known[] = {"epsilon", "rho", "delta",
                                      "t_w",     "w0",  "zeta"};
    for (const auto& item : c.items()) {
      bool ok = false;
      for (const char* k : cbf_known) ok = ok || item.key() == k;
      if (!ok) throw ValidationError("unknown cbf key: " + item.key());
    }
    take(c, "epsilon", cfg.cbf.epsilon);
    take(c, "rho", cfg.cbf.rho);
    take(c, "delta", cfg.cbf.delta);
    take(c, "t_w", cfg.cbf.t_w);
    take(c, "w0", cfg.cbf.w0);
    take(c, "zeta", cfg.cbf.zeta);
  }
  return cfg;
}

std::string config_hash(const RunConfig& cfg) {
  RunConfig keyed = cfg;
  keyed.seed = 0;
  nlohmann::json j = keyed;
  const std::string canon = j.dump();  // keys are stored sorted

  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace flowplan
