#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "empa/core_model.hpp"
#include "empa/error.hpp"
#include "empa/trace.hpp"

namespace empa {

/// free / preallocated / running as one-hot masks over core indices.
struct CorePool {
  std::uint32_t total = 0;
  std::uint64_t free = 0;
  std::uint64_t preallocated = 0;
  std::uint64_t running = 0;

  static constexpr std::uint64_t bit(std::uint32_t core) noexcept { return std::uint64_t{1} << core; }
  std::uint64_t all() const noexcept { return total >= 64 ? ~std::uint64_t{0} : bit(total) - 1; }

  /// The three sets partition {0..total-1}.
  bool partitions() const noexcept {
    return (free & preallocated) == 0 && (free & running) == 0 && (preallocated & running) == 0 &&
           (free | preallocated | running) == all();
  }
  std::uint32_t free_count() const noexcept;
  std::uint32_t busy_count() const noexcept;  // preallocated + running

  void move(std::uint32_t core, std::uint64_t CorePool::*from, std::uint64_t CorePool::*to) noexcept {
    this->*from &= ~bit(core);
    this->*to |= bit(core);
  }
};

enum class AllocState : std::uint8_t { None, Granted, Denied };

inline constexpr std::uint32_t kModeFor = 1;
inline constexpr std::uint32_t kModeSumup = 5;

/// Mass-processing bookkeeping of one parent core. The remaining count lives in
/// the parent's FromChild latch and the next offset in its ForChild latch.
struct MassControl {
  std::uint32_t mode = 0;
  std::uint32_t requested = 0;
  std::uint32_t created = 0;              // children created so far
  std::vector<std::uint32_t> reserved;    // preallocated cores, ascending
  std::uint32_t adder = 0;                // SUMUP accumulator
  bool active = false;                    // between grant and MassPost
  bool creating = false;                  // QTCreate repetition running
  bool finished = false;                  // repetition over, MassPost pending
  std::uint32_t create_addr = 0;
  std::uint32_t term_addr = 0;
  Reg link = Reg::none;
  std::vector<std::uint32_t> live;        // serials of mass children not yet pruned
};

/// The SUMUP adder circuit: 32-bit wrap-around accumulation.
inline void sumup_feed(MassControl& mc, std::uint32_t summand) noexcept { mc.adder += summand; }

enum class WaitKind : std::uint8_t {
  SvRequest,    // meta-instruction retired, not yet serviced
  Children,     // QWait
  Sisters,      // QPWait
  TermPending,  // QTerm's implied QWait -1
  WrapperEnd,   // end of an inline QFCreate body
  MassLoop,     // parked on QTCreate while the SV repeats the body
  CreateStall,  // QCreate/QCall without a free core
};

std::string_view wait_kind_name(WaitKind k) noexcept;

struct WaitState {
  WaitKind kind = WaitKind::SvRequest;
  MetaRequest request;
  std::vector<std::uint32_t> scope;  // QT serials snapshotted at block time
  bool announced = false;            // WaitBegin emitted
};

/// A child's termination result, applied when the parent's next wait resolves.
struct PendingReturn {
  std::uint64_t term_cycle = 0;
  std::uint32_t core = 0;
  std::optional<Reg> link;  // GPR to overwrite; nullopt when nothing is cloned back
  std::uint32_t link_value = 0;
  std::optional<std::uint32_t> from_child;  // value for the parent's FromChild
};

/// Supervisor-side view of one core.
struct CoreControl {
  std::optional<WaitState> wait;
  AllocState alloc = AllocState::None;
  MassControl mass;
  std::vector<std::uint32_t> wrapper_ends;  // QTerm addresses of inline QFCreate bodies
  std::vector<PendingReturn> returns;
  std::vector<std::uint32_t> create_addrs;  // every address this core created a QT from
  std::optional<std::uint64_t> released_at;  // cycle the core last went back to the pool
  // instruction in flight
  std::uint32_t remaining = 0;
  std::optional<Decoded> current;
  std::uint32_t current_addr = 0;
  std::uint64_t started_at = 0;
};

/// Lifetime record of a QT, kept after termination.
struct QtRecord {
  std::string id;
  std::uint32_t core = 0;
  std::optional<std::uint32_t> parent_serial;
  std::uint32_t create_addr = 0;
  QtKind kind = QtKind::Plain;
  std::uint64_t created = 0;
  std::optional<std::uint64_t> terminated;
};

/// Everything the supervisor and the stepping loop share.
struct MachineState {
  std::vector<std::uint8_t> memory;
  std::vector<CoreState> cores;
  std::vector<CoreControl> control;
  CorePool pool;
  std::vector<QtRecord> qts;
  std::uint64_t clock = 0;
  Trace trace;
  std::vector<std::string> warnings;
  bool halted = false;

  void emit(std::uint32_t core, EventKind kind, std::uint32_t addr,
            std::optional<std::uint32_t> payload = std::nullopt);
  const std::string& qt_id(std::uint32_t core) const;
};

/// The SV: single sequential authority over pool, QT lifecycle and latch transfers.
class Supervisor {
 public:
  explicit Supervisor(MachineState& m) : m_(m) {}

  /// Start of a tick: retire terminated QTs from live sets, enter MassPost where due,
  /// then service every Waiting core in ascending index.
  void service();

  /// A core's meta-instruction retired; it waits for the SV from the next tick on.
  void submit(std::uint32_t core, const MetaRequest& req);

  /// A core wrote ForParent through %esv; feeds the parent's adder in SUMUP.
  void on_for_parent_write(std::uint32_t core, std::uint32_t addr, std::uint32_t value);

  /// Root-QT setup at load.
  void create_root(std::uint32_t entry);

  // Individual operations, exposed for tests.
  void handle_qcreate(std::uint32_t core, const MetaRequest& req);
  void handle_qterm(std::uint32_t core, const MetaRequest& req);
  void handle_qwait(std::uint32_t core, const MetaRequest& req, bool sisters);
  void handle_qalloc(std::uint32_t core, const MetaRequest& req);
  void handle_qtcreate(std::uint32_t core, const MetaRequest& req);
  void handle_qfcreate(std::uint32_t core, const MetaRequest& req);
  void handle_qcall(std::uint32_t core, const MetaRequest& req);

  /// Throws InvariantViolation.
  void check_invariants() const;

 private:
  struct Spawn {
    QtKind kind;
    std::uint32_t create_addr;
    std::uint32_t term_addr;
    Reg link;
    std::uint32_t pc;
  };

  void service_core(std::uint32_t core);
  void dispatch(std::uint32_t core, const MetaRequest& req);
  std::optional<std::uint32_t> available_core() const;
  bool is_gone(std::uint32_t serial) const;
  void prune();
  std::uint32_t spawn(std::uint32_t parent, std::uint32_t child, const Spawn& s);
  bool try_create(std::uint32_t core, const MetaRequest& req);
  void block(std::uint32_t core, WaitKind kind, const MetaRequest& req,
             std::vector<std::uint32_t> scope, std::optional<std::uint32_t> announce);
  void resume(std::uint32_t core, std::uint32_t pc);
  void apply_returns(std::uint32_t core);
  void terminate(std::uint32_t core, std::uint32_t addr);
  void mass_step(std::uint32_t core);
  void end_mass_loop(std::uint32_t core);
  void enter_post(std::uint32_t core);
  void release(std::uint32_t core);
  std::vector<std::uint32_t> live_scope(const std::vector<std::uint32_t>& serials,
                                        std::uint32_t target) const;
  [[noreturn]] void fail(std::uint32_t core, ErrorCode code, const std::string& msg) const;

  MachineState& m_;
};

}  // namespace empa
