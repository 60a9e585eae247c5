#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Y86 base instruction set plus the EMPA meta-instruction group (0xE_).
// Byte layouts are documented in docs/encoding.md.

namespace empa {

enum class Reg : std::uint8_t {
  eax = 0x0,
  ecx = 0x1,
  edx = 0x2,
  ebx = 0x3,
  esp = 0x4,
  ebp = 0x5,
  esi = 0x6,
  edi = 0x7,
  eno = 0x8,  // null link register: reads 0, ignores writes
  ecc = 0x9,  // creation index of the current QT among its siblings
  esv = 0xA,  // context dependent latch access
  none = 0xF,
};

constexpr std::size_t kGprCount = 8;

constexpr bool is_gpr(Reg r) noexcept { return static_cast<std::uint8_t>(r) < kGprCount; }
constexpr bool is_pseudo(Reg r) noexcept {
  return r == Reg::eno || r == Reg::ecc || r == Reg::esv;
}
/// Codes 0x0..0xA and 0xF; 0xB..0xE are reserved.
constexpr bool is_valid_reg_code(std::uint8_t code) noexcept { return code <= 0xA || code == 0xF; }

std::string_view reg_name(Reg r) noexcept;
/// Accepts "%eax" style names.
std::optional<Reg> parse_reg(std::string_view token) noexcept;

namespace op {
inline constexpr std::uint8_t halt = 0x00;
inline constexpr std::uint8_t nop = 0x10;
inline constexpr std::uint8_t rrmovl = 0x20;
inline constexpr std::uint8_t cmovle = 0x21;
inline constexpr std::uint8_t cmovl = 0x22;
inline constexpr std::uint8_t cmove = 0x23;
inline constexpr std::uint8_t cmovne = 0x24;
inline constexpr std::uint8_t cmovge = 0x25;
inline constexpr std::uint8_t cmovg = 0x26;
inline constexpr std::uint8_t irmovl = 0x30;
inline constexpr std::uint8_t rmmovl = 0x40;
inline constexpr std::uint8_t mrmovl = 0x50;
inline constexpr std::uint8_t addl = 0x60;
inline constexpr std::uint8_t subl = 0x61;
inline constexpr std::uint8_t andl = 0x62;
inline constexpr std::uint8_t xorl = 0x63;
inline constexpr std::uint8_t jmp = 0x70;
inline constexpr std::uint8_t jle = 0x71;
inline constexpr std::uint8_t jl = 0x72;
inline constexpr std::uint8_t je = 0x73;
inline constexpr std::uint8_t jne = 0x74;
inline constexpr std::uint8_t jge = 0x75;
inline constexpr std::uint8_t jg = 0x76;
inline constexpr std::uint8_t call = 0x80;
inline constexpr std::uint8_t ret = 0x90;
inline constexpr std::uint8_t pushl = 0xA0;
inline constexpr std::uint8_t popl = 0xB0;
inline constexpr std::uint8_t qcreate = 0xE0;
inline constexpr std::uint8_t qterm = 0xE1;
inline constexpr std::uint8_t qwait = 0xE2;
inline constexpr std::uint8_t qpwait = 0xE3;
inline constexpr std::uint8_t qcall = 0xE4;
inline constexpr std::uint8_t qalloc = 0xE5;
inline constexpr std::uint8_t qtcreate = 0xE6;
inline constexpr std::uint8_t qfcreate = 0xE7;
}  // namespace op

inline constexpr std::uint8_t kMetaGroup = 0xE;
/// "-1" argument of the wait instructions: every QT in scope.
inline constexpr std::uint32_t kWildcard = 0xFFFFFFFFu;

/// Operand shape of an opcode; decides the byte layout.
enum class Format : std::uint8_t {
  None,      // op
  RegReg,    // op rA:rB
  ImmReg,    // op F:rB imm32
  RegMem,    // op rA:rB disp32   (rmmovl rA, D(rB))
  MemReg,    // op rA:rB disp32   (mrmovl D(rB), rA)
  Dest,      // op addr32
  PushPop,   // op rA:F
  LinkAddr,  // op link:F addr32  (QCreate family)
  Addr,      // op addr32         (QWait, QPWait, QCall)
  ModeReg,   // op count:F mode32 (QAlloc)
};

/// Timing classes; every opcode belongs to exactly one.
enum class InstrClass : std::uint8_t {
  halt,
  nop,
  rrmovl,
  irmovl,
  rmmovl,
  mrmovl,
  opl,
  jxx,
  call,
  ret,
  pushl,
  popl,
  meta,
};
inline constexpr std::size_t kInstrClassCount = 13;

std::string_view class_name(InstrClass c) noexcept;
std::optional<InstrClass> parse_class(std::string_view name) noexcept;

struct OpcodeInfo {
  std::uint8_t code;
  std::string_view mnemonic;
  Format format;
  std::uint8_t length;
  InstrClass cls;
};

/// nullptr when the byte is not an assigned opcode.
const OpcodeInfo* opcode_info(std::uint8_t code) noexcept;
/// Case-insensitive mnemonic lookup.
const OpcodeInfo* opcode_by_mnemonic(std::string_view mnemonic) noexcept;
std::span<const OpcodeInfo> opcode_table() noexcept;

constexpr bool is_meta_opcode(std::uint8_t code) noexcept { return (code >> 4) == kMetaGroup; }
constexpr bool is_create_family(std::uint8_t code) noexcept {
  return code == op::qcreate || code == op::qtcreate || code == op::qfcreate;
}

struct Instruction {
  std::uint8_t opcode = op::nop;
  Reg ra = Reg::none;
  Reg rb = Reg::none;
  std::uint32_t imm = 0;

  bool operator==(const Instruction&) const = default;
};

/// Byte length of an opcode (1..6). Throws IllegalOpcode.
std::uint8_t instruction_length(std::uint8_t opcode);

/// Throws IllegalOpcode or InvalidOperand when the fields do not fit the opcode's format.
std::vector<std::uint8_t> encode(const Instruction& instr);

struct Decoded {
  Instruction instr;
  std::uint32_t length = 0;
};

/// Throws IllegalOpcode, InvalidRegister or TruncatedInstruction.
Decoded decode(std::span<const std::uint8_t> bytes, std::uint32_t offset);

/// Textbook-style rendering, e.g. "mrmovl 0x4(%esv),%eax" or "QWait -1".
std::string disassemble(const Instruction& instr);

}  // namespace empa
