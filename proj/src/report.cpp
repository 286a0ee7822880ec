#include "phsvds/report.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace phsvds {

using nlohmann::json;

RunReport make_report(const SvdResult& result, json config, double wall_seconds,
                      bool include_vectors) {
  RunReport r;
  r.config = std::move(config);
  for (const auto& t : result.triplets) {
    ReportTriplet rt{t.sigma, t.r_u, t.r_v, t.residual_norm(), to_string(t.flag), {}, {}};
    if (include_vectors) {
      rt.u.assign(t.u.data(), t.u.data() + t.u.size());
      rt.v.assign(t.v.data(), t.v.data() + t.v.size());
    }
    r.triplets.push_back(std::move(rt));
  }
  r.matvecs = result.matvecs;
  r.wall_seconds = wall_seconds;
  r.norm_estimate = result.norm_estimate;
  r.status = to_string(result.status);
  r.seed = result.history.seed;
  r.transposed = result.transposed;
  for (const auto& s : result.stages)
    r.stages.push_back({to_string(s.stage), s.matvecs, s.iterations, to_string(s.status)});
  r.history = result.history;
  return r;
}

namespace {

json history_to_json(const ConvergenceHistory& h) {
  json entries = json::array();
  for (const auto& e : h.entries)
    entries.push_back({{"matvecs", e.matvecs},
                       {"stage", to_string(e.stage)},
                       {"target", e.target_index},
                       {"value", e.value},
                       {"residual", e.residual_norm},
                       {"locked", e.locked},
                       {"restarted", e.restarted}});
  json notes = json::array();
  for (const auto& a : h.annotations) notes.push_back({{"matvecs", a.matvecs}, {"text", a.text}});
  json switches = json::array();
  for (const auto& s : h.switches)
    switches.push_back({{"number", s.number},
                        {"approach", to_string(s.approach)},
                        {"max_iterations", s.max_iterations},
                        {"rate_c", s.rate_c},
                        {"rate_b", s.rate_b},
                        {"num_converged", s.num_converged},
                        {"decided", s.decided}});
  return {{"seed", h.seed}, {"entries", entries}, {"annotations", notes}, {"switches", switches}};
}

ConvergenceHistory history_from_json(const json& j) {
  ConvergenceHistory h;
  h.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("entries"))
    h.entries.push_back({e.at("matvecs").get<long>(), stage_from_string(e.at("stage").get<std::string>()),
                         e.at("target").get<int>(), e.at("value").get<double>(),
                         e.at("residual").get<double>(), e.at("locked").get<bool>(),
                         e.at("restarted").get<bool>()});
  for (const auto& a : j.at("annotations"))
    h.annotations.push_back({a.at("matvecs").get<long>(), a.at("text").get<std::string>()});
  for (const auto& s : j.at("switches"))
    h.switches.push_back({s.at("number").get<int>(), stage_from_string(s.at("approach").get<std::string>()),
                          s.at("max_iterations").get<int>(), s.at("rate_c").get<double>(),
                          s.at("rate_b").get<double>(), s.at("num_converged").get<int>(),
                          s.at("decided").get<bool>()});
  return h;
}

}  // namespace

json to_json(const RunReport& r) {
  json trips = json::array();
  for (const auto& t : r.triplets) {
    json jt = {{"sigma", t.sigma}, {"r_u", t.r_u}, {"r_v", t.r_v}, {"residual", t.residual}, {"flag", t.flag}};
    if (!t.u.empty()) jt["u"] = t.u;
    if (!t.v.empty()) jt["v"] = t.v;
    trips.push_back(std::move(jt));
  }
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"stage", s.stage}, {"matvecs", s.matvecs}, {"iterations", s.iterations}, {"status", s.status}});
  return {{"schema", r.schema},
          {"config", r.config},
          {"matrix", {{"path", r.matrix}, {"rows", r.rows}, {"cols", r.cols}}},
          {"triplets", trips},
          {"matvecs", r.matvecs},
          {"wall_seconds", r.wall_seconds},
          {"norm_estimate", r.norm_estimate},
          {"status", r.status},
          {"seed", r.seed},
          {"transposed", r.transposed},
          {"stages", stages},
          {"history", history_to_json(r.history)}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.schema = j.at("schema").get<std::string>();
  if (r.schema != kReportSchema) throw std::runtime_error("report: unsupported schema " + r.schema);
  r.config = j.at("config");
  r.matrix = j.at("matrix").at("path").get<std::string>();
  r.rows = j.at("matrix").at("rows").get<Index>();
  r.cols = j.at("matrix").at("cols").get<Index>();
  for (const auto& t : j.at("triplets")) {
    ReportTriplet rt;
    rt.sigma = t.at("sigma").get<double>();
    rt.r_u = t.at("r_u").get<double>();
    rt.r_v = t.at("r_v").get<double>();
    rt.residual = t.at("residual").get<double>();
    rt.flag = t.at("flag").get<std::string>();
    if (t.contains("u")) rt.u = t.at("u").get<std::vector<double>>();
    if (t.contains("v")) rt.v = t.at("v").get<std::vector<double>>();
    r.triplets.push_back(std::move(rt));
  }
  r.matvecs = j.at("matvecs").get<long>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.norm_estimate = j.at("norm_estimate").get<double>();
  r.status = j.at("status").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.transposed = j.at("transposed").get<bool>();
  for (const auto& s : j.at("stages"))
    r.stages.push_back({s.at("stage").get<std::string>(), s.at("matvecs").get<long>(),
                        s.at("iterations").get<long>(), s.at("status").get<std::string>()});
  r.history = history_from_json(j.at("history"));
  return r;
}

void write_triplets_csv(std::ostream& os, const RunReport& r) {
  os << "index,sigma,r_u,r_v,residual,flag\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.triplets.size(); ++i) {
    const auto& t = r.triplets[i];
    os << i << ',' << t.sigma << ',' << t.r_u << ',' << t.r_v << ',' << t.residual << ',' << t.flag << '\n';
  }
}

void write_history_csv(std::ostream& os, const ConvergenceHistory& h) {
  os << "matvecs,stage,target,value,residual,locked,restarted\n" << std::setprecision(17);
  for (const auto& e : h.entries)
    os << e.matvecs << ',' << to_string(e.stage) << ',' << e.target_index << ',' << e.value << ','
       << e.residual_norm << ',' << e.locked << ',' << e.restarted << '\n';
}

}  // namespace phsvds
