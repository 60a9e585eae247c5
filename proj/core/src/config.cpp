#include "empa/config.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "empa/error.hpp"

namespace empa {

TimingConfig::TimingConfig() {
  cycles_.fill(1);
  set(InstrClass::mrmovl, 3);
  set(InstrClass::rmmovl, 3);
  set(InstrClass::call, 2);
  set(InstrClass::ret, 2);
  set(InstrClass::pushl, 2);
  set(InstrClass::popl, 2);
}

void TimingConfig::set(InstrClass c, std::uint32_t cycles) {
  if (cycles == 0) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("instruction class '{}' needs at least one cycle", class_name(c)));
  }
  cycles_[static_cast<std::size_t>(c)] = cycles;
}

void MachineConfig::validate() const {
  if (cores < 1 || cores > kMaxCores) {
    throw Error(ErrorCode::ConfigError, fmt::format("cores must be 1..{}, got {}", kMaxCores, cores));
  }
  if (mem_bytes < 4) throw Error(ErrorCode::ConfigError, "mem_bytes must be at least 4");
  if (watchdog == 0) throw Error(ErrorCode::ConfigError, "watchdog must be positive");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::uint64_t number(std::string_view v, std::size_t line) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    v.remove_prefix(2);
  }
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::ConfigError, fmt::format("config line {}: bad number '{}'", line, v));
  }
  return out;
}

}  // namespace

MachineConfig parse_config(std::string_view text, MachineConfig cfg) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, fmt::format("config line {}: expected key = value", line_no));
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view val = trim(line.substr(eq + 1));
    if (key.starts_with("timing.")) key.remove_prefix(7);

    if (key == "cores") {
      cfg.cores = static_cast<std::uint32_t>(number(val, line_no));
    } else if (key == "mem_bytes") {
      cfg.mem_bytes = number(val, line_no);
    } else if (key == "watchdog") {
      cfg.watchdog = number(val, line_no);
    } else if (key == "cycle_limit") {
      cfg.cycle_limit = number(val, line_no);
    } else if (key == "check_invariants") {
      cfg.check_invariants = val == "1" || val == "true" || val == "yes";
    } else if (auto cls = parse_class(key)) {
      cfg.timing.set(*cls, static_cast<std::uint32_t>(number(val, line_no)));
    } else {
      throw Error(ErrorCode::ConfigError, fmt::format("config line {}: unknown key '{}'", line_no, key));
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace empa
