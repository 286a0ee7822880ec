#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "phsvds/history.hpp"
#include "phsvds/phsvds.hpp"

namespace phsvds {

inline constexpr const char* kReportSchema = "phsvds.report/1";

struct ReportTriplet {
  double sigma = 0.0;
  double r_u = 0.0;
  double r_v = 0.0;
  double residual = 0.0;  // sqrt(r_u^2 + r_v^2)
  std::string flag;
  std::vector<double> u;  // empty unless vectors were requested
  std::vector<double> v;
};

struct ReportStage {
  std::string stage;
  long matvecs = 0;
  long iterations = 0;
  std::string status;
};

struct RunReport {
  std::string schema = kReportSchema;
  nlohmann::json config = nlohmann::json::object();
  std::string matrix;
  Index rows = 0;
  Index cols = 0;
  std::vector<ReportTriplet> triplets;
  long matvecs = 0;
  double wall_seconds = 0.0;
  double norm_estimate = 0.0;
  std::string status;
  std::uint64_t seed = 0;
  bool transposed = false;
  std::vector<ReportStage> stages;
  ConvergenceHistory history;
};

RunReport make_report(const SvdResult& result, nlohmann::json config, double wall_seconds,
                      bool include_vectors = false);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

// One row per triplet: index,sigma,r_u,r_v,residual,flag
void write_triplets_csv(std::ostream& os, const RunReport& r);
// One row per history entry: matvecs,stage,target,value,residual,locked,restarted
void write_history_csv(std::ostream& os, const ConvergenceHistory& h);

}  // namespace phsvds
