#include "empa/core_model.hpp"

#include <fmt/format.h>

#include "empa/error.hpp"

namespace empa {

std::string_view latch_name(Latch l) noexcept {
  switch (l) {
    case Latch::ForChild: return "ForChild";
    case Latch::FromChild: return "FromChild";
    case Latch::ForParent: return "ForParent";
    case Latch::FromParent: return "FromParent";
  }
  return "?";
}

std::uint32_t& LatchSet::operator[](Latch l) noexcept {
  switch (l) {
    case Latch::ForChild: return for_child;
    case Latch::FromChild: return from_child;
    case Latch::ForParent: return for_parent;
    case Latch::FromParent: break;
  }
  return from_parent;
}

std::uint32_t LatchSet::operator[](Latch l) const noexcept {
  return const_cast<LatchSet&>(*this)[l];
}

std::string_view phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::None: return "None";
    case Phase::MassPre: return "MassPre";
    case Phase::MassChild: return "MassChild";
    case Phase::MassPost: return "MassPost";
    case Phase::General: return "General";
  }
  return "?";
}

std::string_view status_name(CoreStatus s) noexcept {
  switch (s) {
    case CoreStatus::Free: return "Free";
    case CoreStatus::Preallocated: return "Preallocated";
    case CoreStatus::Running: return "Running";
    case CoreStatus::Waiting: return "Waiting";
  }
  return "?";
}

std::string_view kind_name(QtKind k) noexcept {
  switch (k) {
    case QtKind::Plain: return "Plain";
    case QtKind::Call: return "Call";
    case QtKind::MassTrue: return "MassTrue";
  }
  return "?";
}

bool condition_holds(std::uint8_t fn, const ConditionCodes& cc) noexcept {
  const bool lt = cc.sf != cc.of;
  switch (fn) {
    case 0: return true;
    case 1: return lt || cc.zf;
    case 2: return lt;
    case 3: return cc.zf;
    case 4: return !cc.zf;
    case 5: return !lt;
    case 6: return !lt && !cc.zf;
    default: return false;
  }
}

std::uint32_t load_word(std::span<const std::uint8_t> memory, std::uint32_t addr) {
  if (static_cast<std::uint64_t>(addr) + 4 > memory.size()) {
    throw Error(ErrorCode::AddressOutOfRange, fmt::format("read of 0x{:08x} outside memory", addr));
  }
  return static_cast<std::uint32_t>(memory[addr]) |
         static_cast<std::uint32_t>(memory[addr + 1]) << 8 |
         static_cast<std::uint32_t>(memory[addr + 2]) << 16 |
         static_cast<std::uint32_t>(memory[addr + 3]) << 24;
}

void store_word(std::span<std::uint8_t> memory, std::uint32_t addr, std::uint32_t value) {
  if (static_cast<std::uint64_t>(addr) + 4 > memory.size()) {
    throw Error(ErrorCode::AddressOutOfRange, fmt::format("write of 0x{:08x} outside memory", addr));
  }
  for (int i = 0; i < 4; ++i) memory[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
}

namespace {

class RegisterPort {
 public:
  RegisterPort(CoreState& core, CoreEvent& ev) : core_(core), ev_(ev) {}

  std::uint32_t read(Reg r) {
    if (is_gpr(r)) return core_.reg(r);
    switch (r) {
      case Reg::eno:
      case Reg::none: return 0;
      case Reg::ecc: return core_.qt ? core_.qt->sibling_index : 0;
      case Reg::esv: {
        // resolved at the moment of access
        const Latch l = map_esv(esv_context(core_.phase), Access::Read);
        const std::uint32_t v = core_.latches[l];
        ev_.latch_accesses.push_back({Access::Read, l, v});
        return v;
      }
      default: return 0;
    }
  }

  void write(Reg r, std::uint32_t v) {
    if (is_gpr(r)) {
      core_.regs[static_cast<std::size_t>(r)] = v;
      return;
    }
    switch (r) {
      case Reg::ecc: throw Error(ErrorCode::WriteToEcc, "%ecc is read-only");
      case Reg::esv: {
        const Latch l = map_esv(esv_context(core_.phase), Access::Write);
        core_.latches[l] = v;
        if (l == Latch::ForParent) core_.for_parent_written = true;
        ev_.latch_accesses.push_back({Access::Write, l, v});
        return;
      }
      default: return;  // %eno swallows writes
    }
  }

 private:
  CoreState& core_;
  CoreEvent& ev_;
};

void set_cc(ConditionCodes& cc, std::uint8_t fn, std::uint32_t a, std::uint32_t b, std::uint32_t val) {
  const bool an = static_cast<std::int32_t>(a) < 0;
  const bool bn = static_cast<std::int32_t>(b) < 0;
  const bool vn = static_cast<std::int32_t>(val) < 0;
  cc.zf = val == 0;
  cc.sf = vn;
  switch (fn) {
    case 0: cc.of = (an == bn) && (vn != an); break;  // b + a
    case 1: cc.of = (an != bn) && (vn != bn); break;  // b - a
    default: cc.of = false; break;
  }
}

}  // namespace

CoreEvent execute(CoreState& core, std::span<std::uint8_t> memory, const Instruction& instr,
                  std::uint32_t addr, std::uint32_t length) {
  CoreEvent ev;
  RegisterPort port(core, ev);
  const std::uint8_t fn = instr.opcode & 0xF;
  std::uint32_t next = addr + length;

  switch (instr.opcode >> 4) {
    case 0x0:
      ev.halted = true;
      next = addr;
      break;
    case 0x1: break;
    case 0x2: {
      const std::uint32_t v = port.read(instr.ra);
      if (condition_holds(fn, core.cc)) port.write(instr.rb, v);
      break;
    }
    case 0x3: port.write(instr.rb, instr.imm); break;
    case 0x4: {
      const std::uint32_t v = port.read(instr.ra);
      const std::uint32_t ea = port.read(instr.rb) + instr.imm;
      store_word(memory, ea, v);
      break;
    }
    case 0x5: {
      const std::uint32_t ea = port.read(instr.rb) + instr.imm;
      port.write(instr.ra, load_word(memory, ea));
      break;
    }
    case 0x6: {
      const std::uint32_t a = port.read(instr.ra);
      const std::uint32_t b = port.read(instr.rb);
      std::uint32_t v = 0;
      switch (fn) {
        case 0: v = b + a; break;
        case 1: v = b - a; break;
        case 2: v = b & a; break;
        default: v = b ^ a; break;
      }
      set_cc(core.cc, fn, a, b, v);
      port.write(instr.rb, v);
      break;
    }
    case 0x7:
      if (condition_holds(fn, core.cc)) next = instr.imm;
      break;
    case 0x8: {
      const std::uint32_t sp = core.reg(Reg::esp) - 4;
      store_word(memory, sp, next);
      core.regs[static_cast<std::size_t>(Reg::esp)] = sp;
      next = instr.imm;
      break;
    }
    case 0x9: {
      const std::uint32_t sp = core.reg(Reg::esp);
      next = load_word(memory, sp);
      core.regs[static_cast<std::size_t>(Reg::esp)] = sp + 4;
      break;
    }
    case 0xA: {
      const std::uint32_t v = port.read(instr.ra);
      const std::uint32_t sp = core.reg(Reg::esp) - 4;
      store_word(memory, sp, v);
      core.regs[static_cast<std::size_t>(Reg::esp)] = sp;
      break;
    }
    case 0xB: {
      const std::uint32_t sp = core.reg(Reg::esp);
      const std::uint32_t v = load_word(memory, sp);
      core.regs[static_cast<std::size_t>(Reg::esp)] = sp + 4;
      port.write(instr.ra, v);
      break;
    }
    case kMetaGroup: {
      MetaRequest req{instr, addr, next, 0};
      if (instr.opcode == op::qalloc) req.reg_value = port.read(instr.ra);
      ev.meta = req;
      next = addr;  // the supervisor decides where the core continues
      break;
    }
    default:
      throw Error(ErrorCode::IllegalOpcode,
                  fmt::format("illegal opcode 0x{:02x} at 0x{:04x}", instr.opcode, addr));
  }
  core.pc = next;
  return ev;
}

CoreEvent step_instruction(CoreState& core, std::span<std::uint8_t> memory) {
  const Decoded d = decode(memory, core.pc);
  return execute(core, memory, d.instr, core.pc, d.length);
}

void clone_into(const CoreState& parent, CoreState& child, Reg link) {
  child.regs = parent.regs;
  child.cc = parent.cc;
  child.latches.from_parent = parent.latches.for_child;
  child.parent_mode = parent.mode;
  if (child.qt) child.qt->link = link;
}

}  // namespace empa
