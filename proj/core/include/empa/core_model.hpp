#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "empa/isa.hpp"

namespace empa {

/// Inter-core mailboxes. The parent side uses ForChild/FromChild,
/// the child side ForParent/FromParent.
enum class Latch : std::uint8_t { ForChild, FromChild, ForParent, FromParent };

std::string_view latch_name(Latch l) noexcept;

struct LatchSet {
  std::uint32_t for_child = 0;
  std::uint32_t from_child = 0;
  std::uint32_t for_parent = 0;
  std::uint32_t from_parent = 0;

  std::uint32_t& operator[](Latch l) noexcept;
  std::uint32_t operator[](Latch l) const noexcept;
  bool operator==(const LatchSet&) const = default;
};

/// Processing phase of a core, which selects how %esv resolves.
enum class Phase : std::uint8_t { None, MassPre, MassChild, MassPost, General };

std::string_view phase_name(Phase p) noexcept;

/// Rows of the %esv mapping table. `Cloning` is the link-register transfer
/// performed by the supervisor when %esv is a QT's link register.
enum class EsvContext : std::uint8_t { Cloning, MassChild, MassPre, MassPost, General };
enum class Access : std::uint8_t { Read, Write };

/// The latch that %esv names for an access in a given context.
constexpr Latch map_esv(EsvContext ctx, Access access) noexcept {
  const bool read = access == Access::Read;
  switch (ctx) {
    case EsvContext::Cloning: return read ? Latch::ForParent : Latch::FromChild;
    case EsvContext::MassChild: return read ? Latch::FromParent : Latch::ForParent;
    case EsvContext::MassPre: return read ? Latch::FromParent : Latch::ForChild;
    case EsvContext::MassPost: return read ? Latch::FromChild : Latch::ForParent;
    case EsvContext::General: return read ? Latch::FromChild : Latch::ForParent;
  }
  return Latch::ForParent;
}

constexpr EsvContext esv_context(Phase p) noexcept {
  switch (p) {
    case Phase::MassPre: return EsvContext::MassPre;
    case Phase::MassChild: return EsvContext::MassChild;
    case Phase::MassPost: return EsvContext::MassPost;
    case Phase::None:
    case Phase::General: return EsvContext::General;
  }
  return EsvContext::General;
}

struct ConditionCodes {
  // Y86 reset state: ZF set.
  bool zf = true;
  bool sf = false;
  bool of = false;

  bool operator==(const ConditionCodes&) const = default;
};

/// Outcome of a Y86 condition (jXX / cmovXX function nibble).
bool condition_holds(std::uint8_t fn, const ConditionCodes& cc) noexcept;

enum class CoreStatus : std::uint8_t { Free, Preallocated, Running, Waiting };

std::string_view status_name(CoreStatus s) noexcept;

enum class QtKind : std::uint8_t { Plain, Call, MassTrue };

std::string_view kind_name(QtKind k) noexcept;

/// A quasi-thread bound to a core.
struct QTDescriptor {
  std::uint32_t serial = 0;  // unique within a run; never reused
  std::string id;            // parent id + one sequence character
  std::optional<std::uint32_t> parent_core;
  std::optional<std::uint32_t> parent_serial;
  std::uint32_t create_addr = 0;
  std::uint32_t term_addr = 0;
  Reg link = Reg::none;
  QtKind kind = QtKind::Plain;
  std::uint32_t sibling_index = 0;  // value of %ecc
  std::uint32_t children_created = 0;
  std::vector<std::uint32_t> children;  // serials not yet retired from the live set
};

struct CoreState {
  std::array<std::uint32_t, kGprCount> regs{};
  ConditionCodes cc;
  std::uint32_t pc = 0;
  LatchSet latches;
  std::uint32_t mode = 0;
  std::uint32_t parent_mode = 0;
  CoreStatus status = CoreStatus::Free;
  std::optional<QTDescriptor> qt;
  Phase phase = Phase::None;
  bool for_parent_written = false;  // the child wrote ForParent during this QT

  std::uint32_t reg(Reg r) const noexcept { return regs[static_cast<std::size_t>(r)]; }
};

struct LatchAccess {
  Access access;
  Latch latch;
  std::uint32_t value;
};

/// A meta-instruction handed to the supervisor; never executed by the core.
struct MetaRequest {
  Instruction instr;
  std::uint32_t addr = 0;
  std::uint32_t next_pc = 0;
  std::uint32_t reg_value = 0;  // QAlloc count register, read at execution
};

/// Effects of one executed instruction that other parts of the machine must see.
struct CoreEvent {
  std::vector<LatchAccess> latch_accesses;
  std::optional<MetaRequest> meta;
  bool halted = false;
};

/// Applies the semantics of an already decoded instruction located at `addr`.
/// Throws AddressOutOfRange or WriteToEcc.
CoreEvent execute(CoreState& core, std::span<std::uint8_t> memory, const Instruction& instr,
                  std::uint32_t addr, std::uint32_t length);

/// Fetch, decode and execute the instruction at core.pc.
CoreEvent step_instruction(CoreState& core, std::span<std::uint8_t> memory);

/// QT creation transfer: register file and flags, ForChild -> FromParent,
/// Mode -> ParentMode; records the link register in the child's descriptor.
void clone_into(const CoreState& parent, CoreState& child, Reg link);

std::uint32_t load_word(std::span<const std::uint8_t> memory, std::uint32_t addr);
void store_word(std::span<std::uint8_t> memory, std::uint32_t addr, std::uint32_t value);

}  // namespace empa
