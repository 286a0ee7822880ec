#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phsvds {

enum class Stage { C, B, dynamic_probe, other };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& s);

struct HistoryEntry {
  long matvecs = 0;
  Stage stage = Stage::other;
  int target_index = 0;
  double value = 0.0;
  double residual_norm = 0.0;  // in the caller's metric
  bool locked = false;         // a pair was locked at this iteration
  bool restarted = false;
};

struct Annotation {
  long matvecs = 0;
  std::string text;
};

struct SwitchDecision {
  int number = 0;
  Stage approach = Stage::C;
  int max_iterations = 0;
  double rate_c = 1.0;
  double rate_b = 1.0;
  int num_converged = 0;
  bool decided = false;
};

struct ConvergenceHistory {
  std::uint64_t seed = 0;
  std::vector<HistoryEntry> entries;
  std::vector<Annotation> annotations;
  std::vector<SwitchDecision> switches;

  void annotate(long matvecs, std::string text) { annotations.push_back({matvecs, std::move(text)}); }
  void append(const ConvergenceHistory& other);
  long last_matvecs() const { return entries.empty() ? 0 : entries.back().matvecs; }
};

}  // namespace phsvds
