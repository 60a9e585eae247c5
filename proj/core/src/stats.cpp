#include "empa/stats.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "empa/error.hpp"

namespace empa {

double alpha_eff(std::uint32_t k, double speedup) {
  if (k <= 1) return 1.0;
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - 1.0 / speedup);
}

Stats compute_stats(const Trace& trace, std::uint32_t k, std::optional<std::uint64_t> baseline) {
  Stats s;
  s.cores = k;
  s.busy_cycles.assign(k, 0);
  std::set<std::uint32_t> used;
  std::map<std::uint64_t, std::int64_t> delta;  // live-QT count changes per cycle

  for (const auto& e : trace.events()) {
    s.total_cycles = std::max(s.total_cycles, e.cycle);
    if (e.core >= s.busy_cycles.size()) s.busy_cycles.resize(e.core + 1, 0);
    switch (e.kind) {
      case EventKind::InstrRetired:
      case EventKind::MetaRetired:
        s.busy_cycles[e.core] += e.payload.value_or(1);
        ++(e.kind == EventKind::InstrRetired ? s.instructions : s.meta_instructions);
        break;
      case EventKind::QtCreated:
        ++s.qts;
        used.insert(e.core);
        // a QT created at cycle c executes from cycle c on (the root from cycle 1)
        delta[std::max<std::uint64_t>(e.cycle, 1)] += 1;
        break;
      case EventKind::QtTerminated:
        delta[e.cycle + 1] -= 1;
        break;
      default: break;
    }
  }
  s.cores_used = static_cast<std::uint32_t>(used.size());
  std::int64_t live = 0;
  for (const auto& [cycle, d] : delta) {
    live += d;
    s.max_concurrent = std::max<std::uint32_t>(s.max_concurrent, static_cast<std::uint32_t>(std::max<std::int64_t>(live, 0)));
  }
  if (baseline && s.total_cycles > 0) {
    s.baseline_cycles = baseline;
    s.speedup = static_cast<double>(*baseline) / static_cast<double>(s.total_cycles);
    s.alpha_eff = alpha_eff(k, *s.speedup);
  }
  return s;
}

double require_speedup(const Stats& s) {
  if (!s.speedup) throw Error(ErrorCode::MissingBaseline, "speedup requested without a baseline cycle count");
  return *s.speedup;
}

std::string format_stats(const Stats& s) {
  std::string out;
  out += fmt::format("{:<16}{}\n", "total cycles", s.total_cycles);
  out += fmt::format("{:<16}{}\n", "cores (k)", s.cores);
  out += fmt::format("{:<16}{}\n", "cores used", s.cores_used);
  out += fmt::format("{:<16}{}\n", "max concurrent", s.max_concurrent);
  out += fmt::format("{:<16}{}\n", "QTs", s.qts);
  out += fmt::format("{:<16}{} (+{} meta)\n", "instructions", s.instructions, s.meta_instructions);
  if (s.speedup) {
    out += fmt::format("{:<16}{}\n", "baseline", *s.baseline_cycles);
    out += fmt::format("{:<16}{:.2f}\n", "speedup", *s.speedup);
    out += fmt::format("{:<16}{:.2f}\n", "alpha_eff", *s.alpha_eff);
  }
  out += "core  busy\n";
  for (std::size_t i = 0; i < s.busy_cycles.size(); ++i) out += fmt::format("{:>4}  {}\n", i, s.busy_cycles[i]);
  return out;
}

std::string stats_kv(const Stats& s) {
  std::string out;
  out += fmt::format("totalCycles={}\n", s.total_cycles);
  out += fmt::format("cores={}\n", s.cores);
  out += fmt::format("coresUsed={}\n", s.cores_used);
  out += fmt::format("maxConcurrent={}\n", s.max_concurrent);
  out += fmt::format("qts={}\n", s.qts);
  out += fmt::format("instructions={}\n", s.instructions);
  out += fmt::format("metaInstructions={}\n", s.meta_instructions);
  for (std::size_t i = 0; i < s.busy_cycles.size(); ++i) out += fmt::format("busy.{}={}\n", i, s.busy_cycles[i]);
  if (s.speedup) {
    out += fmt::format("baselineCycles={}\n", *s.baseline_cycles);
    out += fmt::format("speedup={:.6f}\n", *s.speedup);
    out += fmt::format("alphaEff={:.6f}\n", *s.alpha_eff);
  }
  return out;
}

ModelRow model_calculator(std::int64_t ops, Rational cycles, Rational units) {
  if (ops <= 0 || cycles <= 0 || units <= 0) {
    throw Error(ErrorCode::ConfigError, "model parameters must be positive");
  }
  const Rational sp = Rational(ops) / cycles;
  return ModelRow{sp, sp, sp / units};
}

std::string to_decimal(Rational r, int places) {
  std::int64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  // round half away from zero
  const Rational scaled = r * scale;
  const bool neg = scaled < 0;
  const Rational mag = neg ? -scaled : scaled;
  std::int64_t v = (mag.numerator() * 2 + mag.denominator()) / (mag.denominator() * 2);
  std::string digits = fmt::format("{}", v);
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) digits.insert(0, places + 1 - digits.size(), '0');
    digits.insert(digits.size() - places, ".");
  }
  return (neg && v != 0 ? "-" : "") + digits;
}

}  // namespace empa
