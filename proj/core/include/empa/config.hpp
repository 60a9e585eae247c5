#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "empa/isa.hpp"

namespace empa {

/// Cycles each instruction class occupies its core.
class TimingConfig {
 public:
  TimingConfig();

  std::uint32_t operator[](InstrClass c) const noexcept {
    return cycles_[static_cast<std::size_t>(c)];
  }
  /// Throws ConfigError for zero.
  void set(InstrClass c, std::uint32_t cycles);

  bool operator==(const TimingConfig&) const = default;

 private:
  std::array<std::uint32_t, kInstrClassCount> cycles_{};
};

struct MachineConfig {
  static constexpr std::uint32_t kMaxCores = 64;  // pool sets are 64-bit one-hot masks

  std::uint32_t cores = 8;
  std::size_t mem_bytes = 4096;
  TimingConfig timing;
  std::uint64_t watchdog = 10000;        // cycles without any trace event
  std::uint64_t cycle_limit = 50000000;  // hard stop for runaway programs
  bool check_invariants = true;          // pool/forest checks after every tick

  /// Throws ConfigError.
  void validate() const;
};

/// Plain-text `key = value` file; `#` starts a comment. Keys: cores, mem_bytes,
/// watchdog, cycle_limit, check_invariants and the instruction class names
/// (halt nop rrmovl irmovl rmmovl mrmovl opl jxx call ret pushl popl meta),
/// optionally prefixed with "timing.". Throws ConfigError.
MachineConfig parse_config(std::string_view text, MachineConfig base = {});

}  // namespace empa
