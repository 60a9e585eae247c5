#include "empa/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "empa/error.hpp"

namespace empa {

namespace {

constexpr std::array<std::string_view, 16> kRegNames = {
    "%eax", "%ecx", "%edx", "%ebx", "%esp", "%ebp", "%esi", "%edi",
    "%eno", "%ecc", "%esv", "",     "",     "",     "",     ""};

using F = Format;
using C = InstrClass;

constexpr std::array<OpcodeInfo, 35> kOpcodes = {{
    {op::halt, "halt", F::None, 1, C::halt},
    {op::nop, "nop", F::None, 1, C::nop},
    {op::rrmovl, "rrmovl", F::RegReg, 2, C::rrmovl},
    {op::cmovle, "cmovle", F::RegReg, 2, C::rrmovl},
    {op::cmovl, "cmovl", F::RegReg, 2, C::rrmovl},
    {op::cmove, "cmove", F::RegReg, 2, C::rrmovl},
    {op::cmovne, "cmovne", F::RegReg, 2, C::rrmovl},
    {op::cmovge, "cmovge", F::RegReg, 2, C::rrmovl},
    {op::cmovg, "cmovg", F::RegReg, 2, C::rrmovl},
    {op::irmovl, "irmovl", F::ImmReg, 6, C::irmovl},
    {op::rmmovl, "rmmovl", F::RegMem, 6, C::rmmovl},
    {op::mrmovl, "mrmovl", F::MemReg, 6, C::mrmovl},
    {op::addl, "addl", F::RegReg, 2, C::opl},
    {op::subl, "subl", F::RegReg, 2, C::opl},
    {op::andl, "andl", F::RegReg, 2, C::opl},
    {op::xorl, "xorl", F::RegReg, 2, C::opl},
    {op::jmp, "jmp", F::Dest, 5, C::jxx},
    {op::jle, "jle", F::Dest, 5, C::jxx},
    {op::jl, "jl", F::Dest, 5, C::jxx},
    {op::je, "je", F::Dest, 5, C::jxx},
    {op::jne, "jne", F::Dest, 5, C::jxx},
    {op::jge, "jge", F::Dest, 5, C::jxx},
    {op::jg, "jg", F::Dest, 5, C::jxx},
    {op::call, "call", F::Dest, 5, C::call},
    {op::ret, "ret", F::None, 1, C::ret},
    {op::pushl, "pushl", F::PushPop, 2, C::pushl},
    {op::popl, "popl", F::PushPop, 2, C::popl},
    {op::qcreate, "QCreate", F::LinkAddr, 6, C::meta},
    {op::qterm, "QTerm", F::None, 1, C::meta},
    {op::qwait, "QWait", F::Addr, 5, C::meta},
    {op::qpwait, "QPWait", F::Addr, 5, C::meta},
    {op::qcall, "QCall", F::Addr, 5, C::meta},
    {op::qalloc, "QAlloc", F::ModeReg, 6, C::meta},
    {op::qtcreate, "QTCreate", F::LinkAddr, 6, C::meta},
    {op::qfcreate, "QFCreate", F::LinkAddr, 6, C::meta},
}};

constexpr std::array<std::string_view, kInstrClassCount> kClassNames = {
    "halt", "nop", "rrmovl", "irmovl", "rmmovl", "mrmovl", "opl",
    "jxx",  "call", "ret",   "pushl",  "popl",   "meta"};

// Register slot rules per format.
enum class Slot { Unused, Required, Optional };

struct Layout {
  bool reg_byte;
  Slot a;
  Slot b;
  bool imm;
};

constexpr Layout layout_of(Format f) noexcept {
  switch (f) {
    case F::None: return {false, Slot::Unused, Slot::Unused, false};
    case F::RegReg: return {true, Slot::Required, Slot::Required, false};
    case F::ImmReg: return {true, Slot::Unused, Slot::Required, true};
    case F::RegMem:
    case F::MemReg: return {true, Slot::Required, Slot::Optional, true};
    case F::Dest:
    case F::Addr: return {false, Slot::Unused, Slot::Unused, true};
    case F::PushPop: return {true, Slot::Required, Slot::Unused, false};
    case F::LinkAddr:
    case F::ModeReg: return {true, Slot::Required, Slot::Unused, true};
  }
  return {};
}

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool slot_ok(Slot rule, std::uint8_t code) noexcept {
  if (!is_valid_reg_code(code)) return false;
  switch (rule) {
    case Slot::Unused: return code == 0xF;
    case Slot::Required: return code != 0xF;
    case Slot::Optional: return true;
  }
  return false;
}

std::string hex(std::uint32_t v) { return fmt::format("0x{:x}", v); }

}  // namespace

std::string_view reg_name(Reg r) noexcept {
  auto code = static_cast<std::uint8_t>(r);
  if (r == Reg::none) return "none";
  return code < kRegNames.size() ? kRegNames[code] : std::string_view{};
}

std::optional<Reg> parse_reg(std::string_view token) noexcept {
  for (std::size_t i = 0; i <= 0xA; ++i) {
    if (kRegNames[i] == token) return static_cast<Reg>(i);
  }
  return std::nullopt;
}

std::string_view class_name(InstrClass c) noexcept {
  return kClassNames[static_cast<std::size_t>(c)];
}

std::optional<InstrClass> parse_class(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (iequals(kClassNames[i], name)) return static_cast<InstrClass>(i);
  }
  return std::nullopt;
}

const OpcodeInfo* opcode_info(std::uint8_t code) noexcept {
  auto it = std::find_if(kOpcodes.begin(), kOpcodes.end(),
                         [code](const OpcodeInfo& o) { return o.code == code; });
  return it == kOpcodes.end() ? nullptr : &*it;
}

const OpcodeInfo* opcode_by_mnemonic(std::string_view mnemonic) noexcept {
  auto it = std::find_if(kOpcodes.begin(), kOpcodes.end(), [mnemonic](const OpcodeInfo& o) {
    return iequals(o.mnemonic, mnemonic);
  });
  return it == kOpcodes.end() ? nullptr : &*it;
}

std::span<const OpcodeInfo> opcode_table() noexcept { return kOpcodes; }

std::uint8_t instruction_length(std::uint8_t opcode) {
  const auto* info = opcode_info(opcode);
  if (info == nullptr) {
    throw Error(ErrorCode::IllegalOpcode, fmt::format("illegal opcode 0x{:02x}", opcode));
  }
  return info->length;
}

std::vector<std::uint8_t> encode(const Instruction& instr) {
  const auto* info = opcode_info(instr.opcode);
  if (info == nullptr) {
    throw Error(ErrorCode::IllegalOpcode, fmt::format("illegal opcode 0x{:02x}", instr.opcode));
  }
  const Layout lay = layout_of(info->format);
  const auto a = static_cast<std::uint8_t>(instr.ra);
  const auto b = static_cast<std::uint8_t>(instr.rb);
  if (!slot_ok(lay.a, a) || !slot_ok(lay.b, b)) {
    throw Error(ErrorCode::InvalidOperand,
                fmt::format("{}: register operands do not fit the instruction format",
                            info->mnemonic));
  }
  if (!lay.imm && instr.imm != 0) {
    throw Error(ErrorCode::InvalidOperand,
                fmt::format("{} takes no immediate", info->mnemonic));
  }

  std::vector<std::uint8_t> out;
  out.reserve(info->length);
  out.push_back(instr.opcode);
  if (lay.reg_byte) out.push_back(static_cast<std::uint8_t>((a << 4) | b));
  if (lay.imm) {
    for (int shift = 0; shift < 32; shift += 8) {
      out.push_back(static_cast<std::uint8_t>(instr.imm >> shift));
    }
  }
  return out;
}

Decoded decode(std::span<const std::uint8_t> bytes, std::uint32_t offset) {
  if (offset >= bytes.size()) {
    throw Error(ErrorCode::TruncatedInstruction,
                fmt::format("no instruction byte at 0x{:04x}", offset));
  }
  const std::uint8_t code = bytes[offset];
  const auto* info = opcode_info(code);
  if (info == nullptr) {
    throw Error(ErrorCode::IllegalOpcode,
                fmt::format("illegal opcode 0x{:02x} at 0x{:04x}", code, offset));
  }
  if (bytes.size() - offset < info->length) {
    throw Error(ErrorCode::TruncatedInstruction,
                fmt::format("{} at 0x{:04x} runs past the end of memory", info->mnemonic,
                            offset));
  }

  const Layout lay = layout_of(info->format);
  Decoded d;
  d.length = info->length;
  d.instr.opcode = code;
  std::size_t pos = offset + 1;
  if (lay.reg_byte) {
    const std::uint8_t regs = bytes[pos++];
    const std::uint8_t a = regs >> 4;
    const std::uint8_t b = regs & 0xF;
    if (!slot_ok(lay.a, a) || !slot_ok(lay.b, b)) {
      throw Error(ErrorCode::InvalidRegister,
                  fmt::format("bad register byte 0x{:02x} for {} at 0x{:04x}", regs,
                              info->mnemonic, offset));
    }
    d.instr.ra = static_cast<Reg>(a);
    d.instr.rb = static_cast<Reg>(b);
  }
  if (lay.imm) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    d.instr.imm = v;
  }
  return d;
}

std::string disassemble(const Instruction& instr) {
  const auto* info = opcode_info(instr.opcode);
  if (info == nullptr) return fmt::format(".byte 0x{:02x}", instr.opcode);
  const std::string_view m = info->mnemonic;
  auto mem = [&](std::uint32_t disp, Reg base) {
    return base == Reg::none ? hex(disp) : fmt::format("{}({})", hex(disp), reg_name(base));
  };
  auto target = [](std::uint32_t v) { return v == kWildcard ? std::string("-1") : hex(v); };

  switch (info->format) {
    case F::None: return std::string(m);
    case F::RegReg: return fmt::format("{} {},{}", m, reg_name(instr.ra), reg_name(instr.rb));
    case F::ImmReg:
      return fmt::format("{} ${},{}", m, static_cast<std::int32_t>(instr.imm), reg_name(instr.rb));
    case F::RegMem: return fmt::format("{} {},{}", m, reg_name(instr.ra), mem(instr.imm, instr.rb));
    case F::MemReg: return fmt::format("{} {},{}", m, mem(instr.imm, instr.rb), reg_name(instr.ra));
    case F::Dest: return fmt::format("{} {}", m, hex(instr.imm));
    case F::PushPop: return fmt::format("{} {}", m, reg_name(instr.ra));
    case F::LinkAddr: return fmt::format("{} {},{}", m, hex(instr.imm), reg_name(instr.ra));
    case F::Addr: return fmt::format("{} {}", m, target(instr.imm));
    case F::ModeReg: return fmt::format("{} {},{}", m, instr.imm, reg_name(instr.ra));
  }
  return std::string(m);
}

}  // namespace empa
