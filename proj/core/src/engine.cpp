#include "empa/engine.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

namespace empa {

namespace {

std::size_t image_extent(const ObjectImage& image) {
  std::size_t end = 0;
  for (const auto& l : image.listing) {
    if (!l.bytes.empty()) end = std::max<std::size_t>(end, l.addr + l.bytes.size());
  }
  for (std::size_t i = image.memory.size(); i > end; --i) {
    if (image.memory[i - 1] != 0) return i;
  }
  return end;
}

}  // namespace

Machine Machine::load(const ObjectImage& image, const MachineConfig& cfg) {
  cfg.validate();
  const std::size_t extent = image_extent(image);
  if (extent > cfg.mem_bytes) {
    throw Error(ErrorCode::ImageTooLarge,
                fmt::format("image needs {} bytes, machine memory is {}", extent, cfg.mem_bytes));
  }
  Machine m;
  m.cfg_ = cfg;
  m.s_.memory.assign(cfg.mem_bytes, 0);
  std::copy_n(image.memory.begin(), std::min(image.memory.size(), cfg.mem_bytes), m.s_.memory.begin());
  m.s_.cores.resize(cfg.cores);
  m.s_.control.resize(cfg.cores);
  Supervisor(m.s_).create_root(image.entry);
  return m;
}

std::uint32_t Machine::read_word(std::uint32_t addr) const { return load_word(s_.memory, addr); }

void Machine::write_word(std::uint32_t addr, std::uint32_t value) { store_word(s_.memory, addr, value); }

void Machine::fail(std::uint32_t core, const Error& e) const {
  if (e.core()) throw e;
  Error out(e.code(), fmt::format("cycle {} core {}: {}", s_.clock, core, e.what()));
  out.at_core(core);
  throw out;
}

void Machine::step_core(std::uint32_t i) {
  CoreState& c = s_.cores[i];
  CoreControl& cc = s_.control[i];
  if (!cc.current) {
    try {
      cc.current = decode(s_.memory, c.pc);
    } catch (const Error& e) {
      fail(i, e);
    }
    cc.current_addr = c.pc;
    cc.remaining = cfg_.timing[opcode_info(cc.current->instr.opcode)->cls];
    cc.started_at = s_.clock;
    fetches_.push_back({i, c.pc});
  }
  if (--cc.remaining > 0) return;

  const Decoded d = *cc.current;
  const std::uint32_t addr = cc.current_addr;
  const auto duration = static_cast<std::uint32_t>(s_.clock - cc.started_at + 1);
  cc.current.reset();

  CoreEvent ev;
  try {
    ev = execute(c, s_.memory, d.instr, addr, d.length);
  } catch (const Error& e) {
    fail(i, e);
  }

  Supervisor sv(s_);
  s_.emit(i, ev.meta ? EventKind::MetaRetired : EventKind::InstrRetired, addr, duration);
  for (const auto& a : ev.latch_accesses) {
    s_.emit(i, a.access == Access::Read ? EventKind::LatchRead : EventKind::LatchWrite, addr, a.value);
    if (a.access == Access::Write && a.latch == Latch::ForParent) sv.on_for_parent_write(i, addr, a.value);
  }

  if (ev.meta) {
    sv.submit(i, *ev.meta);
  } else if (ev.halted) {
    const auto& qt = *c.qt;
    if (qt.parent_core) {
      fail(i, Error(ErrorCode::HaltOutsideRoot, fmt::format("halt at 0x{:04x} outside the root QT", addr)));
    }
    for (auto s : qt.children) {
      if (!s_.qts[s].terminated) {
        fail(i, Error(ErrorCode::HaltWithLiveChildren,
                      fmt::format("root halted while QT {} is still alive", s_.qts[s].id)));
      }
    }
    s_.qts[qt.serial].terminated = s_.clock;
    s_.emit(i, EventKind::QtTerminated, addr);
    s_.halted = true;
  }
}

void Machine::tick() {
  if (s_.halted) return;
  ++s_.clock;
  fetches_.clear();
  const std::size_t before = s_.trace.size();

  Supervisor sv(s_);
  sv.service();
  for (std::uint32_t i = 0; i < s_.cores.size(); ++i) {
    if (s_.cores[i].status == CoreStatus::Running) step_core(i);
  }
  if (cfg_.check_invariants) sv.check_invariants();
  max_busy_ = std::max(max_busy_, s_.pool.busy_count());

  if (s_.trace.size() > before) last_progress_ = s_.clock;
  if (s_.halted) return;

  const bool any_running = std::any_of(s_.cores.begin(), s_.cores.end(),
                                       [](const CoreState& c) { return c.status == CoreStatus::Running; });
  if (!any_running && s_.trace.size() == before) {
    throw Error(ErrorCode::Deadlock,
                fmt::format("deadlock at cycle {}: no core can make progress\n{}", s_.clock, describe_cores()));
  }
  if (s_.clock - last_progress_ >= cfg_.watchdog) {
    throw Error(ErrorCode::WatchdogExpired,
                fmt::format("watchdog: no event for {} cycles (cycle {})\n{}", cfg_.watchdog, s_.clock,
                            describe_cores()));
  }
  if (s_.clock >= cfg_.cycle_limit) {
    throw Error(ErrorCode::WatchdogExpired,
                fmt::format("cycle limit {} reached\n{}", cfg_.cycle_limit, describe_cores()));
  }
}

std::string Machine::describe_cores() const {
  std::string out;
  for (std::uint32_t i = 0; i < s_.cores.size(); ++i) {
    const CoreState& c = s_.cores[i];
    if (!c.qt) continue;
    out += fmt::format("  core {} QT {} {} pc=0x{:04x}", i, c.qt->id, status_name(c.status), c.pc);
    if (const auto& w = s_.control[i].wait) {
      out += fmt::format(" waiting={} at 0x{:04x}", wait_kind_name(w->kind), w->request.addr);
    }
    out += '\n';
  }
  return out;
}

const Trace& run_to_halt(Machine& m) {
  while (!m.halted()) m.tick();
  return m.trace();
}

RunResult run_to_halt(const ObjectImage& image, const MachineConfig& cfg) {
  Machine m = Machine::load(image, cfg);
  run_to_halt(m);
  Trace t = m.trace();
  return RunResult{std::move(t), std::move(m)};
}

}  // namespace empa
