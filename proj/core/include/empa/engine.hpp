#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "empa/assembler.hpp"
#include "empa/config.hpp"
#include "empa/supervisor.hpp"
#include "empa/trace.hpp"

namespace empa {

struct Fetch {
  std::uint32_t core;
  std::uint32_t addr;
};

/// The cycle-accurate machine. A self-contained value: it can be copied,
/// moved to another thread between ticks, and compared by its trace.
class Machine {
 public:
  /// Core 0 becomes the root QT at image.entry. Throws ImageTooLarge, ConfigError.
  static Machine load(const ObjectImage& image, const MachineConfig& cfg = {});

  /// One global clock advance: SV first, then every running core.
  /// Throws the runtime errors (Deadlock, WatchdogExpired, ...) with the core attached.
  void tick();

  bool halted() const noexcept { return s_.halted; }
  std::uint64_t clock() const noexcept { return s_.clock; }
  const Trace& trace() const noexcept { return s_.trace; }
  const MachineConfig& config() const noexcept { return cfg_; }

  const CoreState& core(std::uint32_t i) const { return s_.cores.at(i); }
  const std::vector<CoreState>& cores() const noexcept { return s_.cores; }
  const CoreControl& control(std::uint32_t i) const { return s_.control.at(i); }
  const CorePool& pool() const noexcept { return s_.pool; }
  const std::vector<QtRecord>& qts() const noexcept { return s_.qts; }
  const std::vector<std::string>& warnings() const noexcept { return s_.warnings; }
  /// Instruction starts during the last tick.
  const std::vector<Fetch>& last_fetches() const noexcept { return fetches_; }
  /// Largest number of simultaneously busy (running or preallocated) cores seen.
  std::uint32_t max_busy() const noexcept { return max_busy_; }

  std::span<const std::uint8_t> memory() const noexcept { return s_.memory; }
  std::uint32_t read_word(std::uint32_t addr) const;
  /// Host-side poke, e.g. to inject input vectors before the run.
  void write_word(std::uint32_t addr, std::uint32_t value);

  /// One line per core bound to a QT: status, wait reason, pc.
  std::string describe_cores() const;

 private:
  void step_core(std::uint32_t i);
  [[noreturn]] void fail(std::uint32_t core, const Error& e) const;

  MachineConfig cfg_;
  MachineState s_;
  std::vector<Fetch> fetches_;
  std::uint64_t last_progress_ = 0;
  std::uint32_t max_busy_ = 1;
};

/// Ticks until the root halts. Errors propagate; the machine keeps its state
/// (and partial trace) for inspection.
const Trace& run_to_halt(Machine& m);

struct RunResult {
  Trace trace;
  Machine machine;
};
RunResult run_to_halt(const ObjectImage& image, const MachineConfig& cfg = {});

}  // namespace empa
