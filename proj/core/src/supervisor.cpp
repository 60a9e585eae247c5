#include "empa/supervisor.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

namespace empa {

namespace {

constexpr std::string_view kSeqChars =
    "123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

std::string seq_suffix(std::uint32_t n) {
  // n is 1-based
  if (n <= kSeqChars.size()) return std::string(1, kSeqChars[n - 1]);
  return fmt::format("({})", n);
}

bool contains(const std::vector<std::uint32_t>& v, std::uint32_t x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::uint32_t CorePool::free_count() const noexcept { return std::popcount(free); }
std::uint32_t CorePool::busy_count() const noexcept { return std::popcount(preallocated | running); }

std::string_view wait_kind_name(WaitKind k) noexcept {
  switch (k) {
    case WaitKind::SvRequest: return "SvRequest";
    case WaitKind::Children: return "Children";
    case WaitKind::Sisters: return "Sisters";
    case WaitKind::TermPending: return "TermPending";
    case WaitKind::WrapperEnd: return "WrapperEnd";
    case WaitKind::MassLoop: return "MassLoop";
    case WaitKind::CreateStall: return "CreateStall";
  }
  return "?";
}

void MachineState::emit(std::uint32_t core, EventKind kind, std::uint32_t addr,
                        std::optional<std::uint32_t> payload) {
  trace.append(Event{clock, core, qt_id(core), kind, addr, payload});
}

const std::string& MachineState::qt_id(std::uint32_t core) const {
  static const std::string none;
  const auto& qt = cores[core].qt;
  return qt ? qt->id : none;
}

// ---------------------------------------------------------------------------

void Supervisor::fail(std::uint32_t core, ErrorCode code, const std::string& msg) const {
  const std::string& id = m_.qt_id(core);
  Error e(code, fmt::format("cycle {} core {} (QT {}): {}", m_.clock, core, id.empty() ? "-" : id, msg));
  e.at_core(core);
  throw e;
}

bool Supervisor::is_gone(std::uint32_t serial) const {
  const auto& t = m_.qts[serial].terminated;
  return t && *t < m_.clock;
}

void Supervisor::prune() {
  auto gone = [this](std::uint32_t s) { return is_gone(s); };
  for (std::uint32_t i = 0; i < m_.cores.size(); ++i) {
    if (auto& qt = m_.cores[i].qt) std::erase_if(qt->children, gone);
    std::erase_if(m_.control[i].mass.live, gone);
  }
}

std::optional<std::uint32_t> Supervisor::available_core() const {
  for (std::uint32_t i = 0; i < m_.pool.total; ++i) {
    if (!(m_.pool.free & CorePool::bit(i))) continue;
    const auto& rel = m_.control[i].released_at;
    if (!rel || *rel < m_.clock) return i;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> Supervisor::live_scope(const std::vector<std::uint32_t>& serials,
                                                  std::uint32_t target) const {
  std::vector<std::uint32_t> out;
  for (auto s : serials) {
    if (is_gone(s)) continue;
    if (target == kWildcard || m_.qts[s].create_addr == target) out.push_back(s);
  }
  return out;
}

void Supervisor::create_root(std::uint32_t entry) {
  m_.pool.total = static_cast<std::uint32_t>(m_.cores.size());
  m_.pool.free = m_.pool.all();
  m_.pool.preallocated = m_.pool.running = 0;
  m_.pool.move(0, &CorePool::free, &CorePool::running);

  CoreState& root = m_.cores[0];
  root = CoreState{};
  root.pc = entry;
  root.status = CoreStatus::Running;
  root.phase = Phase::General;
  root.qt = QTDescriptor{};
  root.qt->id = "Q";
  root.qt->create_addr = entry;
  m_.qts.push_back(QtRecord{"Q", 0, std::nullopt, entry, QtKind::Plain, m_.clock, std::nullopt});
  m_.emit(0, EventKind::QtCreated, entry);
}

std::uint32_t Supervisor::spawn(std::uint32_t parent, std::uint32_t child, const Spawn& s) {
  CoreState& p = m_.cores[parent];
  auto& pqt = *p.qt;
  const auto serial = static_cast<std::uint32_t>(m_.qts.size());

  QTDescriptor d;
  d.serial = serial;
  d.id = pqt.id + seq_suffix(pqt.children_created + 1);
  d.parent_core = parent;
  d.parent_serial = pqt.serial;
  d.create_addr = s.create_addr;
  d.term_addr = s.term_addr;
  d.kind = s.kind;
  d.sibling_index = s.kind == QtKind::MassTrue ? m_.control[parent].mass.created : 0;

  CoreState& c = m_.cores[child];
  c = CoreState{};
  c.qt = std::move(d);
  clone_into(p, c, s.link);
  c.pc = s.pc;
  c.status = CoreStatus::Running;
  c.phase = s.kind == QtKind::MassTrue ? Phase::MassChild : Phase::General;
  m_.control[child] = CoreControl{};

  pqt.children.push_back(serial);
  ++pqt.children_created;
  auto& addrs = m_.control[parent].create_addrs;
  if (!contains(addrs, s.create_addr)) addrs.push_back(s.create_addr);

  m_.qts.push_back(QtRecord{c.qt->id, child, pqt.serial, s.create_addr, s.kind, m_.clock, std::nullopt});
  m_.emit(child, EventKind::QtCreated, s.create_addr, parent);
  return serial;
}

void Supervisor::block(std::uint32_t core, WaitKind kind, const MetaRequest& req,
                       std::vector<std::uint32_t> scope, std::optional<std::uint32_t> announce) {
  m_.cores[core].status = CoreStatus::Waiting;
  m_.control[core].wait = WaitState{kind, req, std::move(scope), announce.has_value()};
  if (announce) m_.emit(core, EventKind::WaitBegin, req.addr, *announce);
}

void Supervisor::resume(std::uint32_t core, std::uint32_t pc) {
  m_.control[core].wait.reset();
  m_.cores[core].status = CoreStatus::Running;
  m_.cores[core].pc = pc;
}

void Supervisor::release(std::uint32_t core) {
  const auto b = CorePool::bit(core);
  m_.pool.running &= ~b;
  m_.pool.preallocated &= ~b;
  m_.pool.free |= b;
  m_.cores[core] = CoreState{};
  m_.control[core] = CoreControl{};
  m_.control[core].released_at = m_.clock;
  m_.emit(core, EventKind::Idle, 0);
}

void Supervisor::apply_returns(std::uint32_t core) {
  auto& pending = m_.control[core].returns;
  std::vector<PendingReturn> ready;
  std::erase_if(pending, [&](const PendingReturn& r) {
    if (r.term_cycle >= m_.clock) return false;
    ready.push_back(r);
    return true;
  });
  std::stable_sort(ready.begin(), ready.end(), [](const PendingReturn& a, const PendingReturn& b) {
    return a.term_cycle != b.term_cycle ? a.term_cycle < b.term_cycle : a.core < b.core;
  });
  CoreState& c = m_.cores[core];
  for (const auto& r : ready) {
    if (r.link) c.regs[static_cast<std::size_t>(*r.link)] = r.link_value;
    if (r.from_child) c.latches.from_child = *r.from_child;
  }
}

// ---------------------------------------------------------------------------

void Supervisor::submit(std::uint32_t core, const MetaRequest& req) {
  m_.cores[core].status = CoreStatus::Waiting;
  m_.control[core].wait = WaitState{WaitKind::SvRequest, req, {}, false};
}

void Supervisor::service() {
  prune();
  for (std::uint32_t i = 0; i < m_.cores.size(); ++i) {
    const auto& mc = m_.control[i].mass;
    if (mc.active && mc.finished && mc.live.empty()) enter_post(i);
  }
  for (std::uint32_t i = 0; i < m_.cores.size(); ++i) {
    if (m_.cores[i].status == CoreStatus::Waiting) service_core(i);
  }
}

void Supervisor::service_core(std::uint32_t core) {
  auto& cc = m_.control[core];
  WaitState& w = *cc.wait;
  const MetaRequest req = w.request;
  const bool announced = w.announced;
  const std::uint32_t target = req.instr.imm;

  switch (w.kind) {
    case WaitKind::SvRequest:
      cc.wait.reset();
      dispatch(core, req);
      return;
    case WaitKind::Children:
    case WaitKind::Sisters:
    case WaitKind::WrapperEnd:
    case WaitKind::TermPending: {
      const bool done = std::all_of(w.scope.begin(), w.scope.end(),
                                    [this](std::uint32_t s) { return is_gone(s); });
      if (!done) return;
      const WaitKind kind = w.kind;
      if (announced) {
        m_.emit(core, EventKind::WaitEnd, req.addr, kind == WaitKind::Children || kind == WaitKind::Sisters
                                                        ? target
                                                        : kWildcard);
      }
      apply_returns(core);
      if (kind == WaitKind::TermPending) {
        cc.wait.reset();
        terminate(core, req.addr);
      } else {
        resume(core, req.next_pc);
      }
      return;
    }
    case WaitKind::MassLoop:
      mass_step(core);
      return;
    case WaitKind::CreateStall:
      if (try_create(core, req) && announced) m_.emit(core, EventKind::WaitEnd, req.addr, req.addr);
      return;
  }
}

void Supervisor::dispatch(std::uint32_t core, const MetaRequest& req) {
  switch (req.instr.opcode) {
    case op::qcreate: return handle_qcreate(core, req);
    case op::qterm: return handle_qterm(core, req);
    case op::qwait: return handle_qwait(core, req, false);
    case op::qpwait: return handle_qwait(core, req, true);
    case op::qcall: return handle_qcall(core, req);
    case op::qalloc: return handle_qalloc(core, req);
    case op::qtcreate: return handle_qtcreate(core, req);
    case op::qfcreate: return handle_qfcreate(core, req);
    default:
      fail(core, ErrorCode::IllegalOpcode, fmt::format("opcode 0x{:02x} is not a meta-instruction", req.instr.opcode));
  }
}

// ---------------------------------------------------------------------------
// creation

bool Supervisor::try_create(std::uint32_t core, const MetaRequest& req) {
  Spawn s{};
  std::uint32_t parent_next = 0;
  if (req.instr.opcode == op::qcall) {
    const std::uint32_t target = req.instr.imm;
    std::optional<Decoded> d;
    try {
      d = decode(m_.memory, target);
    } catch (const Error&) {
    }
    if (!d || d->instr.opcode != op::qcreate) {
      fail(core, ErrorCode::TargetNotQCreate, fmt::format("QCall target 0x{:04x} is not a QCreate", target));
    }
    s = Spawn{QtKind::Call, target, d->instr.imm, d->instr.ra, target + d->length};
    parent_next = req.next_pc;
  } else {
    s = Spawn{QtKind::Plain, req.addr, req.instr.imm, req.instr.ra, req.next_pc};
    parent_next = req.instr.imm + 1;
  }
  if (s.link == Reg::ecc) fail(core, ErrorCode::InvalidLinkRegister, "%ecc cannot be a link register");

  const auto child = available_core();
  if (!child) return false;
  m_.pool.move(*child, &CorePool::free, &CorePool::running);
  spawn(core, *child, s);
  resume(core, parent_next);
  return true;
}

void Supervisor::handle_qcreate(std::uint32_t core, const MetaRequest& req) {
  if (!try_create(core, req)) block(core, WaitKind::CreateStall, req, {}, req.addr);
}

void Supervisor::handle_qcall(std::uint32_t core, const MetaRequest& req) { handle_qcreate(core, req); }

// ---------------------------------------------------------------------------
// termination and waits

void Supervisor::handle_qterm(std::uint32_t core, const MetaRequest& req) {
  auto& cc = m_.control[core];
  const auto& qt = *m_.cores[core].qt;
  auto scope = live_scope(qt.children, kWildcard);

  if (!cc.wrapper_ends.empty() && cc.wrapper_ends.back() == req.addr) {
    // end of an inline QFCreate body: wait for everything it started, then fall through
    cc.wrapper_ends.pop_back();
    if (scope.empty()) {
      apply_returns(core);
      resume(core, req.next_pc);
    } else {
      block(core, WaitKind::WrapperEnd, req, std::move(scope), kWildcard);
    }
    return;
  }
  if (!qt.parent_core) fail(core, ErrorCode::QTermInRoot, "QTerm executed by the root QT");

  if (scope.empty()) {
    apply_returns(core);
    terminate(core, req.addr);
  } else {
    block(core, WaitKind::TermPending, req, std::move(scope), kWildcard);
  }
}

void Supervisor::terminate(std::uint32_t core, std::uint32_t addr) {
  CoreState& c = m_.cores[core];
  const QTDescriptor qt = *c.qt;
  const std::uint32_t parent = *qt.parent_core;
  const MassControl& pmc = m_.control[parent].mass;
  m_.qts[qt.serial].terminated = m_.clock;

  PendingReturn r{m_.clock, core, std::nullopt, 0, std::nullopt};
  if (is_gpr(qt.link)) {
    r.link = qt.link;
    r.link_value = c.reg(qt.link);
  } else if (qt.link == Reg::esv) {
    const Latch src = map_esv(EsvContext::Cloning, Access::Read);
    r.from_child = c.latches[src];
  }
  const bool sumup_child = qt.kind == QtKind::MassTrue && pmc.mode == kModeSumup;
  if (c.for_parent_written && !sumup_child) r.from_child = c.latches.for_parent;
  if (r.link || r.from_child) m_.control[parent].returns.push_back(r);

  // an unused reservation of the terminating QT goes back to the pool
  for (auto rc : m_.control[core].mass.reserved) {
    if (m_.cores[rc].status == CoreStatus::Preallocated) release(rc);
  }

  m_.emit(core, EventKind::QtTerminated, addr);

  if (qt.kind == QtKind::MassTrue && pmc.mode == kModeFor && pmc.creating) {
    // the FOR core stays reserved for the next iteration
    c = CoreState{};
    c.status = CoreStatus::Preallocated;
    m_.control[core] = CoreControl{};
    m_.pool.move(core, &CorePool::running, &CorePool::preallocated);
  } else {
    release(core);
  }
}

void Supervisor::handle_qwait(std::uint32_t core, const MetaRequest& req, bool sisters) {
  const std::uint32_t target = req.instr.imm;
  const auto& qt = *m_.cores[core].qt;
  std::vector<std::uint32_t> serials;
  const std::vector<std::uint32_t>* known = &m_.control[core].create_addrs;

  if (sisters) {
    if (!qt.parent_core) {
      resume(core, req.next_pc);  // the root has no sisters
      return;
    }
    const std::uint32_t p = *qt.parent_core;
    for (auto s : m_.cores[p].qt->children) {
      if (s != qt.serial) serials.push_back(s);
    }
    known = &m_.control[p].create_addrs;
  } else {
    serials = qt.children;
  }

  if (target != kWildcard && !contains(*known, target)) {
    m_.warnings.push_back(fmt::format("cycle {} core {}: {} target 0x{:04x} matches no created QT (WaitOnUnknownTarget)",
                                      m_.clock, core, sisters ? "QPWait" : "QWait", target));
    resume(core, req.next_pc);
    return;
  }

  auto scope = live_scope(serials, target);
  if (scope.empty()) {
    apply_returns(core);
    resume(core, req.next_pc);
  } else {
    block(core, sisters ? WaitKind::Sisters : WaitKind::Children, req, std::move(scope), target);
  }
}

// ---------------------------------------------------------------------------
// mass processing

void Supervisor::handle_qalloc(std::uint32_t core, const MetaRequest& req) {
  const std::uint32_t mode = req.instr.imm;
  if (mode != kModeFor && mode != kModeSumup) {
    fail(core, ErrorCode::UnknownMode, fmt::format("QAlloc mode {} is not supported", mode));
  }
  auto& cc = m_.control[core];
  CoreState& c = m_.cores[core];

  // a grant that was never used is returned first
  if (cc.mass.active && !cc.mass.creating && !cc.mass.finished) {
    for (auto rc : cc.mass.reserved) release(rc);
    cc.mass.reserved.clear();
  }

  const std::uint32_t count = req.reg_value;
  const std::uint64_t need = mode == kModeFor ? (count ? 1 : 0) : count;

  std::vector<std::uint32_t> avail;
  for (std::uint32_t i = 0; i < m_.pool.total && avail.size() < need; ++i) {
    if (!(m_.pool.free & CorePool::bit(i))) continue;
    const auto& rel = m_.control[i].released_at;
    if (!rel || *rel < m_.clock) avail.push_back(i);
  }

  if (avail.size() >= need) {
    for (auto rc : avail) {
      m_.pool.move(rc, &CorePool::free, &CorePool::preallocated);
      m_.cores[rc] = CoreState{};
      m_.cores[rc].status = CoreStatus::Preallocated;
      m_.control[rc] = CoreControl{};
    }
    cc.mass = MassControl{};
    cc.mass.mode = mode;
    cc.mass.requested = count;
    cc.mass.reserved = std::move(avail);
    cc.mass.active = true;
    cc.alloc = AllocState::Granted;
    c.latches.from_child = count;
    c.latches.for_child = 0;
    c.mode = mode;
    c.phase = Phase::MassPre;
  } else {
    cc.alloc = AllocState::Denied;
  }
  resume(core, req.next_pc);
}

void Supervisor::handle_qtcreate(std::uint32_t core, const MetaRequest& req) {
  auto& cc = m_.control[core];
  const std::uint32_t term = req.instr.imm;
  if (cc.alloc == AllocState::None) fail(core, ErrorCode::OrphanMassCreate, "QTCreate without a preceding QAlloc");
  if (cc.alloc == AllocState::Denied || !cc.mass.active || cc.mass.creating || cc.mass.finished) {
    resume(core, term + 1);
    return;
  }
  if (req.instr.ra == Reg::ecc) fail(core, ErrorCode::InvalidLinkRegister, "%ecc cannot be a link register");
  cc.mass.creating = true;
  cc.mass.create_addr = req.addr;
  cc.mass.term_addr = term;
  cc.mass.link = req.instr.ra;
  block(core, WaitKind::MassLoop, req, {}, term);
  mass_step(core);
}

void Supervisor::handle_qfcreate(std::uint32_t core, const MetaRequest& req) {
  auto& cc = m_.control[core];
  const std::uint32_t term = req.instr.imm;
  switch (cc.alloc) {
    case AllocState::None:
      fail(core, ErrorCode::OrphanMassCreate, "QFCreate without a preceding QAlloc");
    case AllocState::Granted:
      resume(core, term + 1);
      return;
    case AllocState::Denied:
      // run the body on this core; its QTerm acts as QWait -1 and falls through
      cc.wrapper_ends.push_back(term);
      resume(core, req.next_pc);
      return;
  }
}

void Supervisor::mass_step(std::uint32_t core) {
  auto& mc = m_.control[core].mass;
  CoreState& c = m_.cores[core];

  if (mc.mode == kModeFor) {
    if (!mc.live.empty()) return;  // previous iteration still running
    apply_returns(core);           // link and break channel before the test
  }
  const std::size_t limit = mc.mode == kModeFor ? (mc.reserved.empty() ? 0 : SIZE_MAX) : mc.reserved.size();
  if (c.latches.from_child == 0 || mc.created >= limit) {
    end_mass_loop(core);
    return;
  }

  const std::uint32_t child = mc.mode == kModeFor ? mc.reserved.front() : mc.reserved[mc.created];
  m_.pool.move(child, &CorePool::preallocated, &CorePool::running);
  const auto serial =
      spawn(core, child, Spawn{QtKind::MassTrue, mc.create_addr, mc.term_addr, mc.link, mc.create_addr + 6});
  mc.live.push_back(serial);
  ++mc.created;
  c.latches.for_child += 4;
  c.latches.from_child -= 1;
}

void Supervisor::end_mass_loop(std::uint32_t core) {
  auto& cc = m_.control[core];
  auto& mc = cc.mass;
  const bool announced = cc.wait && cc.wait->announced;
  const std::uint32_t qtcreate_addr = cc.wait ? cc.wait->request.addr : mc.create_addr;
  mc.creating = false;
  mc.finished = true;
  if (announced) m_.emit(core, EventKind::WaitEnd, qtcreate_addr, mc.term_addr);
  resume(core, mc.term_addr + 1);

  // reserved cores that carry no child go back to the pool
  for (std::size_t i = 0; i < mc.reserved.size(); ++i) {
    const auto rc = mc.reserved[i];
    if (m_.cores[rc].status == CoreStatus::Preallocated) release(rc);
  }
  mc.reserved.clear();

  if (mc.live.empty()) {
    enter_post(core);
  } else {
    m_.cores[core].phase = Phase::General;
  }
}

void Supervisor::enter_post(std::uint32_t core) {
  auto& mc = m_.control[core].mass;
  CoreState& c = m_.cores[core];
  c.phase = Phase::MassPost;
  if (mc.mode == kModeSumup) c.latches.from_child = mc.adder;
  mc.active = false;
}

void Supervisor::on_for_parent_write(std::uint32_t core, std::uint32_t addr, std::uint32_t value) {
  const auto& qt = m_.cores[core].qt;
  if (!qt || qt->kind != QtKind::MassTrue || !qt->parent_core) return;
  auto& pmc = m_.control[*qt->parent_core].mass;
  if (pmc.mode != kModeSumup || !pmc.active) return;
  sumup_feed(pmc, value);
  m_.emit(core, EventKind::SumFeed, addr, value);
}

// ---------------------------------------------------------------------------

void Supervisor::check_invariants() const {
  auto bad = [this](const std::string& msg) {
    throw Error(ErrorCode::InvariantViolation, fmt::format("cycle {}: {}", m_.clock, msg));
  };
  const CorePool& p = m_.pool;
  if (!p.partitions()) {
    bad(fmt::format("pool sets do not partition the cores (free={:#x} pre={:#x} run={:#x})", p.free,
                    p.preallocated, p.running));
  }

  std::uint64_t owned = 0;
  for (std::uint32_t i = 0; i < m_.cores.size(); ++i) {
    const CoreState& c = m_.cores[i];
    const auto b = CorePool::bit(i);
    switch (c.status) {
      case CoreStatus::Free:
        if (!(p.free & b) || c.qt) bad(fmt::format("core {} free but not in the free set or bound to a QT", i));
        break;
      case CoreStatus::Preallocated:
        if (!(p.preallocated & b) || c.qt) bad(fmt::format("core {} preallocated inconsistently", i));
        break;
      case CoreStatus::Running:
      case CoreStatus::Waiting:
        if (!(p.running & b) || !c.qt) bad(fmt::format("core {} busy without a QT or outside the running set", i));
        break;
    }
    if (c.qt && c.qt->parent_serial) {
      const auto ps = *c.qt->parent_serial;
      if (ps >= c.qt->serial) bad(fmt::format("QT {} has a younger parent", c.qt->id));
      if (m_.qts[ps].terminated) bad(fmt::format("QT {} outlived its parent", c.qt->id));
      const auto pc = *c.qt->parent_core;
      if (!m_.cores[pc].qt || m_.cores[pc].qt->serial != ps) bad(fmt::format("QT {} lost its parent core", c.qt->id));
    }
    const auto& mc = m_.control[i].mass;
    for (auto rc : mc.reserved) {
      if (owned & CorePool::bit(rc)) bad(fmt::format("core {} reserved twice", rc));
      owned |= CorePool::bit(rc);
      if (!c.qt) bad(fmt::format("core {} holds a reservation without a QT", i));
    }
    if (mc.mode == kModeFor && mc.live.size() > 1) bad(fmt::format("FOR parent {} has several live children", i));
  }
  if ((p.preallocated & ~owned) != 0) bad("a preallocated core has no owner");
}

}  // namespace empa
