#include "repl.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace empa::cli {

namespace {

constexpr const char* kHelp =
    "commands:\n"
    "  step [n]          advance n cycles (default 1)\n"
    "  run               run to halt or breakpoint\n"
    "  cores             core pool\n"
    "  regs <core>       registers, flags, latches, phase\n"
    "  mem <addr> <len>  hex dump\n"
    "  qts               live QT forest\n"
    "  break <addr>      stop after a cycle that fetches <addr> (label or number)\n"
    "  trace <file>      write the trace so far\n"
    "  quit\n";

std::optional<std::uint32_t> parse_addr(const std::string& tok, const ObjectImage& image) {
  if (auto s = image.symbol(tok)) return s;
  try {
    std::size_t used = 0;
    const auto v = std::stoll(tok, &used, 0);
    if (used == tok.size()) return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

class Session {
 public:
  Session(Machine& m, const ObjectImage& image, std::ostream& out) : m_(m), image_(image), out_(out) {}

  bool dead() const { return dead_; }

  // One tick with reporting; false when the machine cannot advance.
  bool tick(bool quiet) {
    if (dead_ || m_.halted()) {
      if (!quiet) out_ << (dead_ ? "machine stopped on an error\n" : "machine halted\n");
      return false;
    }
    const std::size_t before = m_.trace().size();
    try {
      m_.tick();
    } catch (const Error& e) {
      out_ << "error: " << e.what() << "\n";
      dead_ = true;
      return false;
    }
    if (!quiet) {
      out_ << fmt::format("cycle {}\n", m_.clock());
      for (const auto& f : m_.last_fetches()) {
        std::string text = "?";
        try {
          text = disassemble(decode(m_.memory(), f.addr).instr);
        } catch (const Error&) {
        }
        out_ << fmt::format("  core {} fetch 0x{:04x}  {}\n", f.core, f.addr, text);
      }
      const auto& ev = m_.trace().events();
      for (std::size_t i = before; i < ev.size(); ++i) out_ << "  " << format_event(ev[i]) << "\n";
    }
    if (m_.halted()) out_ << fmt::format("halted at cycle {}\n", m_.clock());
    return true;
  }

  bool hit_break() const {
    for (const auto& f : m_.last_fetches()) {
      if (breaks_.count(f.addr)) {
        out_ << fmt::format("break: core {} at 0x{:04x} (cycle {})\n", f.core, f.addr, m_.clock());
        return true;
      }
    }
    return false;
  }

  void cmd_step(std::istringstream& args) {
    long n = 1;
    args >> n;
    if (n < 1) n = 1;
    for (long i = 0; i < n; ++i) {
      if (!tick(false) || hit_break()) break;
    }
  }

  void cmd_run() {
    while (tick(true)) {
      if (hit_break()) return;
    }
    if (m_.halted()) out_ << fmt::format("halted at cycle {}\n", m_.clock());
  }

  void cmd_cores() {
    const auto& p = m_.pool();
    out_ << fmt::format("cycle {}  free={:#x} preallocated={:#x} running={:#x}\n", m_.clock(), p.free,
                        p.preallocated, p.running);
    for (std::uint32_t i = 0; i < m_.cores().size(); ++i) {
      const auto& c = m_.core(i);
      out_ << fmt::format("  core {:>2} {:<12} qt={:<8} pc=0x{:04x}", i, status_name(c.status),
                          c.qt ? c.qt->id : "-", c.pc);
      if (const auto& w = m_.control(i).wait) out_ << " wait=" << wait_kind_name(w->kind);
      out_ << "\n";
    }
  }

  void cmd_regs(std::istringstream& args) {
    std::uint32_t i = 0;
    if (!(args >> i) || i >= m_.cores().size()) {
      out_ << "usage: regs <core>\n";
      return;
    }
    const auto& c = m_.core(i);
    for (std::uint8_t r = 0; r < kGprCount; ++r) {
      out_ << fmt::format("{}=0x{:08x}{}", reg_name(static_cast<Reg>(r)), c.regs[r], r % 4 == 3 ? "\n" : "  ");
    }
    out_ << fmt::format("pc=0x{:04x}  ZF={} SF={} OF={}  status={}  phase={}\n", c.pc, int(c.cc.zf), int(c.cc.sf),
                        int(c.cc.of), status_name(c.status), phase_name(c.phase));
    out_ << fmt::format("ForChild=0x{:08x}  FromChild=0x{:08x}  ForParent=0x{:08x}  FromParent=0x{:08x}\n",
                        c.latches.for_child, c.latches.from_child, c.latches.for_parent, c.latches.from_parent);
    out_ << fmt::format("mode={}  parentMode={}  qt={}\n", c.mode, c.parent_mode, c.qt ? c.qt->id : "-");
  }

  void cmd_mem(std::istringstream& args) {
    std::string a, l;
    args >> a >> l;
    const auto addr = parse_addr(a, image_);
    const auto len = parse_addr(l.empty() ? "16" : l, image_);
    if (!addr || !len) {
      out_ << "usage: mem <addr> <len>\n";
      return;
    }
    const auto mem = m_.memory();
    for (std::uint32_t off = 0; off < *len; off += 16) {
      out_ << fmt::format("0x{:04x}:", *addr + off);
      for (std::uint32_t j = off; j < std::min(*len, off + 16); ++j) {
        const std::uint64_t at = std::uint64_t{*addr} + j;
        if (at < mem.size()) out_ << fmt::format(" {:02x}", mem[at]);
        else out_ << " --";
      }
      out_ << "\n";
    }
  }

  void cmd_qts() {
    const auto& qts = m_.qts();
    for (std::uint32_t s = 0; s < qts.size(); ++s) {
      const auto& q = qts[s];
      if (q.terminated) continue;
      std::size_t depth = 0;
      for (auto p = q.parent_serial; p; p = qts[*p].parent_serial) ++depth;
      out_ << fmt::format("{}{} core={} kind={} created@{} from 0x{:04x}\n", std::string(depth * 2, ' '), q.id,
                          q.core, kind_name(q.kind), q.created, q.create_addr);
    }
  }

  void cmd_break(std::istringstream& args) {
    std::string a;
    args >> a;
    if (auto addr = parse_addr(a, image_)) {
      breaks_.insert(*addr);
      out_ << fmt::format("breakpoint at 0x{:04x}\n", *addr);
    } else {
      out_ << "usage: break <addr>\n";
    }
  }

  void cmd_trace(std::istringstream& args) {
    std::string path;
    args >> path;
    std::ofstream f(path);
    if (!f) {
      out_ << "cannot write " << path << "\n";
      return;
    }
    m_.trace().write(f);
  }

 private:
  Machine& m_;
  const ObjectImage& image_;
  std::ostream& out_;
  std::set<std::uint32_t> breaks_;
  bool dead_ = false;
};

}  // namespace

int run_repl(Machine& machine, const ObjectImage& image, std::istream& in, std::ostream& out) {
  Session s(machine, image, out);
  std::string line;
  out << "(empa) ";
  while (std::getline(in, line)) {
    std::istringstream args(line);
    std::string cmd;
    args >> cmd;
    if (cmd.empty()) {
    } else if (cmd == "step" || cmd == "s") {
      s.cmd_step(args);
    } else if (cmd == "run" || cmd == "r") {
      s.cmd_run();
    } else if (cmd == "cores") {
      s.cmd_cores();
    } else if (cmd == "regs") {
      s.cmd_regs(args);
    } else if (cmd == "mem") {
      s.cmd_mem(args);
    } else if (cmd == "qts") {
      s.cmd_qts();
    } else if (cmd == "break" || cmd == "b") {
      s.cmd_break(args);
    } else if (cmd == "trace") {
      s.cmd_trace(args);
    } else if (cmd == "quit" || cmd == "q" || cmd == "exit") {
      break;
    } else {
      out << "unknown command '" << cmd << "'\n" << kHelp;
    }
    out << "(empa) ";
  }
  out << "\n";
  return s.dead() ? 2 : 0;
}

}  // namespace empa::cli
