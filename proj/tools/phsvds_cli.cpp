#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phsvds/analysis.hpp"
#include "phsvds/baselines.hpp"
#include "phsvds/dense.hpp"
#include "phsvds/generators.hpp"
#include "phsvds/matrix_market.hpp"
#include "phsvds/operators.hpp"
#include "phsvds/phsvds.hpp"
#include "phsvds/report.hpp"

using namespace phsvds;
using nlohmann::json;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;
constexpr Index kDenseAnalysisLimit = 2000;

struct SvdsArgs {
  std::string matrix;
  int k = 1;
  std::string which = "smallest";
  double tol = 1e-10;
  std::string stage2 = "jdqmr";
  std::string precond = "none";
  int block = 1;
  int max_basis = 35;
  int min_restart = 21;
  bool dynamic = false;
  std::uint64_t seed = 0;
  std::string out = "json";
  std::string output;
  std::string history;
  long max_matvecs = 10'000'000;
  bool random_guess = false;
  bool vectors = false;
  double shift = 0.0;
};

struct AnalyzeArgs {
  std::string matrix;
  std::string sigma_list;
  int k = 1;
};

struct CompareArgs {
  std::string matrix;
  std::string target = "smallest";
  int steps = 100;
  bool restarted = false;
  double tol = 1e-8;
  std::string output;
};

struct GenerateArgs {
  std::string kind;
  std::string output;
  std::string values;
  Index n = 300;
  Index rows = 100;
  Index cols = 80;
  double cond = 1e3;
  double norm = 1.0;
  double density = 0.05;
  double scale = 1e4;
  std::uint64_t seed = 0;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number in list: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

json rated(const Rated& r) {
  if (r.value) return *r.value;
  return nullptr;
}

int cmd_svds(SvdsArgs args) {
  if (const char* env = std::getenv("PHSVDS_SEED")) args.seed = std::stoull(env);
  auto a = std::make_shared<const SparseMatrix>(read_matrix_market(args.matrix));

  SvdConfig cfg;
  cfg.k = args.k;
  cfg.which = args.which == "largest" ? SvdTarget::largest : SvdTarget::smallest;
  cfg.tol = args.tol;
  cfg.stage2 = args.stage2 == "gdk" ? Stage2Method::gdk : Stage2Method::jdqmr;
  cfg.block_size = args.block;
  cfg.max_basis = args.max_basis;
  cfg.min_restart = args.min_restart;
  cfg.max_matvecs = args.max_matvecs;
  cfg.seed = args.seed;
  cfg.dynamic = args.dynamic;
  cfg.random_guess = args.random_guess;

  std::string precond = args.precond;
  if (args.dynamic && precond == "none") precond = "jacobi";
  if (precond == "jacobi") {
    auto pair = jacobi_preconditioners(a);
    cfg.precond_c = std::make_shared<Preconditioner>(pair.for_c);
    cfg.precond_b = std::make_shared<Preconditioner>(pair.for_b);
  } else if (precond == "ilu0") {
    auto pair = ilu0_preconditioners(a);
    cfg.precond_c = std::make_shared<Preconditioner>(pair.for_c);
    cfg.precond_b = std::make_shared<Preconditioner>(pair.for_b);
  } else if (precond == "shift-invert-qr") {
    cfg.shift_invert = ShiftInvertMode::qr_of_A;
  } else if (precond == "shift-invert-lu") {
    cfg.shift_invert = ShiftInvertMode::lu_of_B;
    cfg.shift_invert_shift = args.shift;
  }

  json config = {{"k", cfg.k},
                 {"which", args.which},
                 {"tol", cfg.tol},
                 {"stage2", args.stage2},
                 {"precond", precond},
                 {"block", cfg.block_size},
                 {"max_basis", cfg.max_basis},
                 {"min_restart", cfg.min_restart},
                 {"dynamic", cfg.dynamic},
                 {"seed", cfg.seed},
                 {"max_matvecs", cfg.max_matvecs},
                 {"random_guess", cfg.random_guess}};
  if (precond == "shift-invert-lu") config["shift"] = args.shift;

  const auto t0 = std::chrono::steady_clock::now();
  const SvdResult result = phsvds_solve(a, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunReport report = make_report(result, config, secs, args.vectors);
  report.matrix = args.matrix;
  report.rows = a->rows();
  report.cols = a->cols();

  std::ostringstream os;
  if (args.out == "csv") write_triplets_csv(os, report);
  else os << std::setw(2) << to_json(report) << '\n';
  emit(args.output, os.str());
  if (!args.history.empty()) {
    std::ostringstream hs;
    write_history_csv(hs, report.history);
    emit(args.history, hs.str());
  }
  return result.status == SolveStatus::converged ? kExitConverged : kExitPartial;
}

int cmd_analyze(const AnalyzeArgs& args) {
  std::vector<double> sigma;
  json out;
  if (!args.sigma_list.empty()) {
    sigma = parse_list(args.sigma_list);
    out["source"] = "sigma-list";
  } else {
    const SparseMatrix a = read_matrix_market(args.matrix);
    out["source"] = args.matrix;
    out["rows"] = a.rows();
    out["cols"] = a.cols();
    if (std::min(a.rows(), a.cols()) <= kDenseAnalysisLimit) {
      const auto svd = dense_svd(a.to_dense());
      sigma.assign(svd.sigma.data(), svd.sigma.data() + svd.sigma.size());
      out["norm_method"] = "dense";
    } else {
      SvdConfig cfg;
      const SvdProblem p = make_problem(std::make_shared<const SparseMatrix>(a), cfg);
      out["norm_method"] = "lanczos";
      out["norm"] = estimate_norm(p);
      out["spectrum"] = nullptr;
      out["reason"] = "spectrum not computed above the dense size limit";
      std::cout << std::setw(2) << out << '\n';
      return kExitConverged;
    }
  }
  const SpectrumSummary s = summarize_spectrum(sigma);
  out["norm"] = s.norm;
  out["condition"] = s.condition;
  auto gap = [](const GapStatistic& g) { return json{{"value", g.value}, {"multiplicity", g.multiplicity}}; };
  out["gap_m"] = {{"1", gap(s.gap_1)}, {"5", gap(s.gap_5)}, {"10", gap(s.gap_10)}};
  if (args.k > 0 && static_cast<std::size_t>(args.k) <= sigma.size() && sigma.size() >= 2)
    out["gap_m"][std::to_string(args.k)] = gap(spectrum_gaps(s.sigma, args.k));
  json rates;
  json reasons = json::object();
  auto put = [&](const char* name, const Rated& r) {
    rates[name] = rated(r);
    if (!r.value) reasons[name] = r.reason;
  };
  put("gamma_b", s.gamma_b);
  put("gamma_c", s.gamma_c);
  put("gamma", s.gamma);
  put("rho", s.rho);
  put("q", s.q);
  put("tau", s.tau);
  out["rates"] = rates;
  out["invalid"] = reasons;
  std::cout << std::setw(2) << out << '\n';
  return kExitConverged;
}

int cmd_compare(const CompareArgs& args) {
  auto a = std::make_shared<const SparseMatrix>(read_matrix_market(args.matrix));
  double norm = 0.0;
  if (std::min(a->rows(), a->cols()) <= kDenseAnalysisLimit) {
    norm = dense_svd(a->to_dense()).sigma.maxCoeff();
  } else {
    SvdConfig cfg;
    norm = estimate_norm(make_problem(a, cfg));
  }
  const auto traces = compare_methods(a, args.steps, args.target != "largest", args.restarted,
                                      args.tol, norm);
  std::ostringstream os;
  os << "method,step,sigma,residual\n" << std::setprecision(17);
  for (const auto& m : traces)
    for (const auto& t : m.trace) os << m.method << ',' << t.step << ',' << t.value << ',' << t.residual << '\n';
  emit(args.output, os.str());
  return kExitConverged;
}

int cmd_generate(const GenerateArgs& args) {
  SparseMatrix a;
  if (args.kind == "table1") {
    a = diagonal_matrix(table1_spectrum());
  } else if (args.kind == "fig3") {
    a = diagonal_matrix(fig3_spectrum());
  } else if (args.kind == "fig3-precond") {
    a = perturbed_diagonal(fig3_spectrum(), args.scale, args.seed);
  } else if (args.kind == "diag") {
    a = diagonal_matrix(parse_list(args.values));
  } else if (args.kind == "fig1") {
    a = random_orthogonal_with_spectrum(log_spaced_spectrum(args.n, args.cond, args.norm), args.seed);
  } else if (args.kind == "random") {
    a = random_sparse(args.rows, args.cols, args.density, args.seed);
  } else {
    throw std::invalid_argument("unknown kind: " + args.kind);
  }
  if (args.output.empty() || args.output == "-") write_matrix_market(std::cout, a);
  else write_matrix_market(args.output, a);
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage singular value solver"};
  app.require_subcommand(1);

  SvdsArgs svds;
  auto* s = app.add_subcommand("svds", "compute extreme singular triplets");
  s->add_option("--matrix", svds.matrix, "Matrix Market file")->required()->check(CLI::ExistingFile);
  s->add_option("--k", svds.k, "number of triplets")->check(CLI::PositiveNumber);
  s->add_option("--which", svds.which)->check(CLI::IsMember({"smallest", "largest"}));
  s->add_option("--tol", svds.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  s->add_option("--stage2", svds.stage2)->check(CLI::IsMember({"gdk", "jdqmr"}));
  s->add_option("--precond", svds.precond)
      ->check(CLI::IsMember({"none", "jacobi", "ilu0", "shift-invert-qr", "shift-invert-lu"}));
  s->add_option("--shift", svds.shift, "shift for shift-invert-lu");
  s->add_option("--block", svds.block)->check(CLI::PositiveNumber);
  s->add_option("--max-basis", svds.max_basis)->check(CLI::PositiveNumber);
  s->add_option("--min-restart", svds.min_restart)->check(CLI::PositiveNumber);
  s->add_option("--max-matvecs", svds.max_matvecs)->check(CLI::PositiveNumber);
  s->add_flag("--dynamic", svds.dynamic, "switch between C and B by convergence rate");
  s->add_flag("--random-guess", svds.random_guess, "random initial guess instead of ones");
  s->add_flag("--vectors", svds.vectors, "include singular vectors in the JSON report");
  s->add_option("--seed", svds.seed);
  s->add_option("--out", svds.out)->check(CLI::IsMember({"json", "csv"}));
  s->add_option("--output", svds.output, "output file (default stdout)");
  s->add_option("--history", svds.history, "write the convergence history as CSV");

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "spectrum gaps and rate bounds");
  auto* an_m = an->add_option("--matrix", analyze.matrix)->check(CLI::ExistingFile);
  auto* an_s = an->add_option("--sigma-list", analyze.sigma_list, "comma separated singular values");
  an_m->excludes(an_s);
  an->add_option("--k", analyze.k, "also report gamma_m(k)")->check(CLI::PositiveNumber);

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "residual traces of baseline eigenmethods");
  c->add_option("--matrix", compare.matrix)->required()->check(CLI::ExistingFile);
  c->add_option("--target", compare.target)->check(CLI::IsMember({"smallest", "largest"}));
  c->add_option("--steps", compare.steps)->check(CLI::PositiveNumber);
  c->add_option("--restarted", compare.restarted);
  c->add_option("--tol", compare.tol)->check(CLI::PositiveNumber);
  c->add_option("--output", compare.output);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic test matrix");
  g->add_option("--kind", gen.kind)
      ->required()
      ->check(CLI::IsMember({"table1", "fig3", "fig3-precond", "diag", "fig1", "random"}));
  g->add_option("--output", gen.output);
  g->add_option("--values", gen.values, "diagonal entries for --kind diag");
  g->add_option("--n", gen.n);
  g->add_option("--rows", gen.rows);
  g->add_option("--cols", gen.cols);
  g->add_option("--cond", gen.cond);
  g->add_option("--norm", gen.norm);
  g->add_option("--density", gen.density);
  g->add_option("--scale", gen.scale);
  g->add_option("--seed", gen.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*s) return cmd_svds(svds);
    if (*an) {
      if (analyze.matrix.empty() && analyze.sigma_list.empty())
        throw std::invalid_argument("analyze needs --matrix or --sigma-list");
      return cmd_analyze(analyze);
    }
    if (*c) return cmd_compare(compare);
    if (*g) return cmd_generate(gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
