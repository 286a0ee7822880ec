#include "phsvds/history.hpp"

#include <stdexcept>

namespace phsvds {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::C: return "C";
    case Stage::B: return "B";
    case Stage::dynamic_probe: return "dynamic_probe";
    case Stage::other: return "other";
  }
  return "other";
}

Stage stage_from_string(const std::string& s) {
  if (s == "C") return Stage::C;
  if (s == "B") return Stage::B;
  if (s == "dynamic_probe") return Stage::dynamic_probe;
  if (s == "other") return Stage::other;
  throw std::invalid_argument("unknown stage '" + s + "'");
}

void ConvergenceHistory::append(const ConvergenceHistory& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  annotations.insert(annotations.end(), other.annotations.begin(), other.annotations.end());
  switches.insert(switches.end(), other.switches.begin(), other.switches.end());
}

}  // namespace phsvds
