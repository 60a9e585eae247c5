#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "empa/trace.hpp"

namespace empa {

struct Stats {
  std::uint64_t total_cycles = 0;
  std::uint32_t cores = 1;       // k: cores the machine had
  std::uint32_t cores_used = 0;  // cores that hosted at least one QT
  std::vector<std::uint64_t> busy_cycles;  // per core, retired-instruction cycles
  std::uint32_t max_concurrent = 0;        // most QTs alive in one cycle
  std::uint64_t instructions = 0;
  std::uint64_t meta_instructions = 0;
  std::uint64_t qts = 0;
  std::optional<std::uint64_t> baseline_cycles;
  std::optional<double> speedup;
  std::optional<double> alpha_eff;
};

/// Effective parallelization by Amdahl inversion: (k/(k-1))(1 - 1/s); 1 for k = 1.
double alpha_eff(std::uint32_t k, double speedup);

Stats compute_stats(const Trace& trace, std::uint32_t k,
                    std::optional<std::uint64_t> baseline_cycles = std::nullopt);

/// Throws MissingBaseline when the stats carry no baseline.
double require_speedup(const Stats& s);

/// Human-readable table.
std::string format_stats(const Stats& s);
/// `key=value` lines; stable key order.
std::string stats_kv(const Stats& s);

using Rational = boost::rational<std::int64_t>;

struct ModelRow {
  Rational parallelization;
  Rational speedup;
  Rational efficiency;
};

/// Closed-form parallelism model: speedup = ops/cycles, efficiency = speedup/units.
ModelRow model_calculator(std::int64_t ops, Rational cycles, Rational units);

/// Rounded decimal text of a rational, e.g. 8/3 -> "2.67".
std::string to_decimal(Rational r, int places = 2);

}  // namespace empa
