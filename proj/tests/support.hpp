#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zlab/chains.hpp"
#include "zlab/ladder.hpp"
#include "zlab/quad.hpp"

namespace zlab::testing {

struct OracleRow {
  double t;
  double value;
};

inline std::vector<OracleRow> read_oracle(const std::string& name) {
  std::ifstream in(std::string(ZLAB_FIXTURES) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::vector<OracleRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    rows.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return rows;
}

/// One cache to 3e4 per test binary; building it takes about a second.
inline std::shared_ptr<const IntegralCache> shared_cache() {
  static const auto cache = std::make_shared<const IntegralCache>(build_cache(30000.0, 1.0, {}, {}, 1));
  return cache;
}

inline const LadderModel& shared_model() {
  static const LadderModel model(shared_cache());
  return model;
}

inline ChainBuilder& shared_builder() {
  static ChainBuilder builder(shared_model());
  return builder;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace zlab::testing
