#include "empa/assembler.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "empa/error.hpp"
#include "empa/isa.hpp"

namespace empa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

[[noreturn]] void fail(ErrorCode code, std::size_t line, const std::string& what) {
  throw Error(code, fmt::format("line {}: {}", line, what), line);
}

/// Numeric literal: decimal or 0x-hex, optionally negative; wraps to 32 bits.
std::optional<std::uint32_t> parse_number(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (v > 0xFFFFFFFFull) return std::nullopt;
  if (neg && v > 0x80000000ull) return std::nullopt;
  auto u = static_cast<std::uint32_t>(v);
  return neg ? static_cast<std::uint32_t>(0u - u) : u;
}

/// A value operand: literal or label reference, resolved in pass 2.
using Value = std::variant<std::uint32_t, std::string>;

struct MemOperand {
  Value disp;
  Reg base = Reg::none;
};

struct Statement {
  std::size_t line = 0;
  std::string source;
  std::uint32_t addr = 0;
  std::uint32_t size = 0;
  enum class Kind { Empty, Instr, Long, Pos, Align } kind = Kind::Empty;
  const OpcodeInfo* info = nullptr;
  std::vector<std::string> operands;
};

std::vector<std::string> split_operands(std::string_view text) {
  std::vector<std::string> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      out.emplace_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

class Assembler {
 public:
  Assembler(std::string_view source, const AssembleOptions& opts) : opts_(opts) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
      auto nl = source.find('\n', pos);
      if (nl == std::string_view::npos) nl = source.size();
      std::string_view raw = source.substr(pos, nl - pos);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++line_no;
      if (!(nl == source.size() && raw.empty() && line_no > 1)) {
        lines_.emplace_back(line_no, std::string(raw));
      }
      pos = nl + 1;
    }
  }

  ObjectImage run() {
    pass_one();
    return pass_two();
  }

 private:
  void pass_one() {
    std::uint32_t addr = 0;
    for (auto& [line_no, text] : lines_) {
      Statement st;
      st.line = line_no;
      st.source = text;
      std::string_view body = text;
      if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
      body = trim(body);

      // leading labels
      while (true) {
        auto colon = body.find(':');
        if (colon == std::string_view::npos) break;
        auto name = trim(body.substr(0, colon));
        if (!is_identifier(name)) break;
        define(std::string(name), addr, line_no);
        body = trim(body.substr(colon + 1));
      }

      if (!body.empty()) {
        std::size_t sp = 0;
        while (sp < body.size() && !std::isspace(static_cast<unsigned char>(body[sp]))) ++sp;
        std::string_view head = body.substr(0, sp);
        st.operands = split_operands(body.substr(sp));

        if (head == ".pos" || head == ".align") {
          if (st.operands.size() != 1) fail(ErrorCode::SyntaxError, line_no, fmt::format("{} takes one number", head));
          auto v = parse_number(st.operands[0]);
          if (!v) fail(ErrorCode::SyntaxError, line_no, fmt::format("bad number '{}'", st.operands[0]));
          if (head == ".pos") {
            st.kind = Statement::Kind::Pos;
            addr = *v;
          } else {
            if (*v == 0) fail(ErrorCode::SyntaxError, line_no, ".align 0");
            st.kind = Statement::Kind::Align;
            addr = static_cast<std::uint32_t>((static_cast<std::uint64_t>(addr) + *v - 1) / *v * *v);
          }
          st.addr = addr;
        } else if (head == ".long") {
          if (st.operands.size() != 1) fail(ErrorCode::SyntaxError, line_no, ".long takes one value");
          st.kind = Statement::Kind::Long;
          st.addr = addr;
          st.size = 4;
        } else {
          const auto* info = opcode_by_mnemonic(head);
          if (info == nullptr) fail(ErrorCode::SyntaxError, line_no, fmt::format("unknown instruction '{}'", head));
          st.kind = Statement::Kind::Instr;
          st.info = info;
          st.addr = addr;
          st.size = info->length;
        }
        addr += st.size;
      } else {
        st.addr = addr;
      }
      stmts_.push_back(std::move(st));
    }
  }

  ObjectImage pass_two() {
    ObjectImage img;
    img.memory.assign(opts_.image_bytes, 0);
    img.symbols = symbols_;
    std::vector<std::size_t> owner(opts_.image_bytes, 0);
    std::map<std::uint32_t, std::uint8_t> instr_starts;
    std::vector<std::pair<const Statement*, std::uint32_t>> brackets;

    for (const auto& st : stmts_) {
      ListingLine ll{st.line, st.addr, {}, st.source};
      if (st.kind == Statement::Kind::Long) {
        std::uint32_t v = resolve(value(st.operands[0], st.line), st.line);
        for (int i = 0; i < 4; ++i) ll.bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
      } else if (st.kind == Statement::Kind::Instr) {
        Instruction ins = build(st);
        try {
          ll.bytes = encode(ins);
        } catch (const Error& e) {
          fail(e.code(), st.line, e.what());
        }
        instr_starts.emplace(st.addr, ins.opcode);
        if (is_create_family(ins.opcode)) brackets.emplace_back(&st, ins.imm);
      }

      if (!ll.bytes.empty()) {
        if (static_cast<std::uint64_t>(st.addr) + ll.bytes.size() > opts_.image_bytes) {
          fail(ErrorCode::ImageOverflow, st.line,
               fmt::format("bytes at 0x{:04x} exceed the {}-byte image", st.addr, opts_.image_bytes));
        }
        for (std::size_t i = 0; i < ll.bytes.size(); ++i) {
          auto& o = owner[st.addr + i];
          if (o != 0) {
            fail(ErrorCode::OverlappingPlacement, st.line,
                 fmt::format("byte 0x{:04x} already written by line {}", st.addr + i, o));
          }
          o = st.line;
          img.memory[st.addr + i] = ll.bytes[i];
        }
      }
      img.listing.push_back(std::move(ll));
    }

    for (const auto& [st, target] : brackets) {
      auto it = instr_starts.find(target);
      if (it == instr_starts.end() || it->second != op::qterm) {
        fail(ErrorCode::UnmatchedQTermTarget, st->line,
             fmt::format("{} target 0x{:04x} is not a QTerm", st->info->mnemonic, target));
      }
    }
    return img;
  }

  void define(std::string name, std::uint32_t addr, std::size_t line) {
    if (symbols_.contains(name)) fail(ErrorCode::DuplicateLabel, line, fmt::format("duplicate label '{}'", name));
    symbols_.emplace(std::move(name), addr);
  }

  Value value(std::string_view tok, std::size_t line) const {
    tok = trim(tok);
    if (auto n = parse_number(tok)) return *n;
    if (is_identifier(tok)) return std::string(tok);
    fail(ErrorCode::SyntaxError, line, fmt::format("bad value '{}'", tok));
  }

  std::uint32_t resolve(const Value& v, std::size_t line) const {
    if (const auto* n = std::get_if<std::uint32_t>(&v)) return *n;
    const auto& name = std::get<std::string>(v);
    auto it = symbols_.find(name);
    if (it == symbols_.end()) fail(ErrorCode::UndefinedLabel, line, fmt::format("undefined label '{}'", name));
    return it->second;
  }

  static Reg reg(std::string_view tok, std::size_t line) {
    auto r = parse_reg(trim(tok));
    if (!r) fail(ErrorCode::SyntaxError, line, fmt::format("expected register, got '{}'", tok));
    return *r;
  }

  std::uint32_t immediate(std::string_view tok, std::size_t line) const {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '$') tok.remove_prefix(1);
    return resolve(value(tok, line), line);
  }

  MemOperand memory(std::string_view tok, std::size_t line) const {
    tok = trim(tok);
    MemOperand m{std::uint32_t{0}, Reg::none};
    auto open = tok.find('(');
    if (open == std::string_view::npos) {
      m.disp = value(tok, line);
      return m;
    }
    if (tok.back() != ')') fail(ErrorCode::SyntaxError, line, fmt::format("bad memory operand '{}'", tok));
    auto disp = trim(tok.substr(0, open));
    if (!disp.empty()) m.disp = value(disp, line);
    m.base = reg(tok.substr(open + 1, tok.size() - open - 2), line);
    return m;
  }

  Instruction build(const Statement& st) const {
    const auto& ops = st.operands;
    const std::size_t line = st.line;
    auto want = [&](std::size_t n) {
      if (ops.size() != n) {
        fail(ErrorCode::SyntaxError, line,
             fmt::format("{} expects {} operand(s), got {}", st.info->mnemonic, n, ops.size()));
      }
    };
    Instruction ins;
    ins.opcode = st.info->code;
    switch (st.info->format) {
      case Format::None: want(0); break;
      case Format::RegReg:
        want(2);
        ins.ra = reg(ops[0], line);
        ins.rb = reg(ops[1], line);
        break;
      case Format::ImmReg:
        want(2);
        ins.imm = immediate(ops[0], line);
        ins.rb = reg(ops[1], line);
        break;
      case Format::RegMem: {
        want(2);
        ins.ra = reg(ops[0], line);
        auto m = memory(ops[1], line);
        ins.rb = m.base;
        ins.imm = resolve(m.disp, line);
        break;
      }
      case Format::MemReg: {
        want(2);
        auto m = memory(ops[0], line);
        ins.rb = m.base;
        ins.imm = resolve(m.disp, line);
        ins.ra = reg(ops[1], line);
        break;
      }
      case Format::Dest:
      case Format::Addr:
        want(1);
        ins.imm = immediate(ops[0], line);
        break;
      case Format::PushPop:
        want(1);
        ins.ra = reg(ops[0], line);
        break;
      case Format::LinkAddr:
      case Format::ModeReg:
        want(2);
        ins.imm = immediate(ops[0], line);
        ins.ra = reg(ops[1], line);
        break;
    }
    return ins;
  }

  AssembleOptions opts_;
  std::vector<std::pair<std::size_t, std::string>> lines_;
  std::vector<Statement> stmts_;
  SymbolTable symbols_;
};

}  // namespace

std::optional<std::uint32_t> ObjectImage::symbol(std::string_view name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) return std::nullopt;
  return it->second;
}

ObjectImage assemble(std::string_view source, const AssembleOptions& options) {
  return Assembler(source, options).run();
}

std::string write_listing(const ObjectImage& image) {
  std::string out;
  for (const auto& ll : image.listing) {
    std::string bytes;
    for (auto b : ll.bytes) bytes += fmt::format("{:02x}", b);
    if (bytes.empty()) {
      out += fmt::format("0x{:04x}: | {}\n", ll.addr, ll.source);
    } else {
      out += fmt::format("0x{:04x}: {} | {}\n", ll.addr, bytes, ll.source);
    }
  }
  return out;
}

std::string listing_source(std::string_view listing) {
  std::string out;
  std::size_t pos = 0;
  while (pos < listing.size()) {
    auto nl = listing.find('\n', pos);
    if (nl == std::string_view::npos) nl = listing.size();
    std::string_view line = listing.substr(pos, nl - pos);
    auto bar = line.find('|');
    if (bar != std::string_view::npos) {
      auto src = line.substr(bar + 1);
      if (!src.empty() && src.front() == ' ') src.remove_prefix(1);
      out.append(src);
    }
    out.push_back('\n');
    pos = nl + 1;
  }
  return out;
}

ObjectImage image_from_bytes(std::vector<std::uint8_t> bytes) {
  ObjectImage img;
  img.memory = std::move(bytes);
  return img;
}

}  // namespace empa
