#include <gtest/gtest.h>

#include <algorithm>

#include "empa/assembler.hpp"
#include "empa/engine.hpp"
#include "empa/error.hpp"
#include "test_support.hpp"

using namespace empa;
using empa::testing::cores;

namespace {

Machine run(std::string_view src, std::uint32_t n) {
  Machine m = Machine::load(assemble(src), cores(n));
  run_to_halt(m);
  return m;
}

ErrorCode run_error(std::string_view src, std::uint32_t n) {
  Machine m = Machine::load(assemble(src), cores(n));
  try {
    run_to_halt(m);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "program halted normally";
  return ErrorCode::IoError;
}

std::vector<Event> of_kind(const Trace& t, EventKind k) {
  std::vector<Event> out;
  for (const auto& e : t.events()) {
    if (e.kind == k) out.push_back(e);
  }
  return out;
}

// last child termination; the root's own comes at halt
std::uint64_t last_termination(const Trace& t) {
  std::uint64_t c = 0;
  for (const auto& e : of_kind(t, EventKind::QtTerminated)) {
    if (e.core != 0) c = std::max(c, e.cycle);
  }
  return c;
}

constexpr const char* kTwoChildren =
    "      QCreate T1,%eax\n"
    "      irmovl $1,%eax\n"
    "T1:   QTerm\n"
    "      QCreate T2,%ebx\n"
    "      irmovl $2,%ebx\n"
    "      nop\n"
    "      nop\n"
    "T2:   QTerm\n"
    "      QWait -1\n"
    "      halt\n";

}  // namespace

TEST(Supervisor, QWaitAllEndsTheCycleAfterTheLastTermination) {
  Machine m = run(kTwoChildren, 4);
  const auto ends = of_kind(m.trace(), EventKind::WaitEnd);
  ASSERT_FALSE(ends.empty());
  EXPECT_EQ(ends.back().core, 0u);
  EXPECT_EQ(ends.back().cycle, last_termination(m.trace()) + 1);
  // link registers cloned back
  EXPECT_EQ(m.core(0).regs[0], 1u);
  EXPECT_EQ(m.core(0).regs[3], 2u);
  EXPECT_EQ(m.qts().size(), 3u);
  EXPECT_EQ(m.qts()[1].id, "Q1");
  EXPECT_EQ(m.qts()[2].id, "Q2");
}

TEST(Supervisor, QWaitSpecificTarget) {
  Machine m = run(
      "      QCreate T1,%eax\n"
      "      irmovl $1,%eax\n"
      "T1:   QTerm\n"
      "      QCreate T2,%ebx\n"
      "      irmovl $2,%ebx\n"
      "      nop\n"
      "      nop\n"
      "      nop\n"
      "T2:   QTerm\n"
      "      QWait T1\n"
      "      rrmovl %ebx,%esi\n"  // T2 still running: its return is not applied yet
      "      QWait -1\n"
      "      halt\n",
      4);
  EXPECT_EQ(m.core(0).regs[0], 1u);
  EXPECT_EQ(m.core(0).regs[6], 0u);
  EXPECT_EQ(m.core(0).regs[3], 2u);
}

TEST(Supervisor, NullLinkClonesNothingBack) {
  Machine m = run(
      "      irmovl $7,%eax\n"
      "      QCreate T,%eno\n"
      "      irmovl $1,%eax\n"
      "T:    QTerm\n"
      "      QWait -1\n"
      "      halt\n",
      2);
  EXPECT_EQ(m.core(0).regs[0], 7u);
}

TEST(Supervisor, ChildSeesParentRegisters) {
  Machine m = run(
      "      irmovl $5,%ecx\n"
      "      QCreate T,%eax\n"
      "      rrmovl %ecx,%eax\n"
      "      addl %ecx,%eax\n"
      "T:    QTerm\n"
      "      QWait -1\n"
      "      halt\n",
      2);
  EXPECT_EQ(m.core(0).regs[0], 10u);
}

TEST(Supervisor, QPWaitWaitsForSisters) {
  // the second child waits for its elder sister before reading memory she wrote
  Machine m = run(
      "      QCreate T1,%eno\n"
      "      irmovl $3,%eax\n"
      "      nop\n"
      "      nop\n"
      "      nop\n"
      "      rmmovl %eax,V\n"
      "T1:   QTerm\n"
      "      QCreate T2,%ebx\n"
      "      QPWait -1\n"
      "      mrmovl V,%ebx\n"
      "T2:   QTerm\n"
      "      QWait -1\n"
      "      halt\n"
      "V:    .long 0\n",
      4);
  EXPECT_EQ(m.core(0).regs[3], 3u);
}

TEST(Supervisor, QPWaitInRootIsNoOp) {
  Machine m = run("QPWait -1\nhalt\n", 1);
  EXPECT_TRUE(m.halted());
}

TEST(Supervisor, QCallCreatesAtTheTarget) {
  Machine m = run(
      "      irmovl $4,%ecx\n"
      "      QCall Sq\n"
      "      QWait -1\n"
      "      halt\n"
      "      .pos 0x40\n"
      "Sq:   QCreate SqEnd,%eax\n"
      "      rrmovl %ecx,%eax\n"
      "      addl %eax,%eax\n"
      "SqEnd: QTerm\n",
      2);
  EXPECT_EQ(m.core(0).regs[0], 8u);
  ASSERT_EQ(m.qts().size(), 2u);
  EXPECT_EQ(m.qts()[1].kind, QtKind::Call);
  EXPECT_EQ(m.qts()[1].create_addr, 0x40u);
}

TEST(Supervisor, Faults) {
  EXPECT_EQ(run_error("QCall X\nhalt\nX: nop\n", 2), ErrorCode::TargetNotQCreate);
  EXPECT_EQ(run_error("irmovl $1,%eax\nQAlloc 3,%eax\nhalt\n", 2), ErrorCode::UnknownMode);
  EXPECT_EQ(run_error("QTCreate T,%eno\nT: QTerm\nhalt\n", 2), ErrorCode::OrphanMassCreate);
  EXPECT_EQ(run_error("QFCreate T,%eno\nT: QTerm\nhalt\n", 2), ErrorCode::OrphanMassCreate);
  EXPECT_EQ(run_error("QCreate T,%ecc\nT: QTerm\nhalt\n", 2), ErrorCode::InvalidLinkRegister);
  EXPECT_EQ(run_error("QCreate T,%eno\nhalt\nT: QTerm\nQWait -1\nhalt\n", 2), ErrorCode::HaltOutsideRoot);
  EXPECT_EQ(run_error("QTerm\nhalt\n", 1), ErrorCode::QTermInRoot);
  EXPECT_EQ(run_error("QCreate T,%eno\nL: jmp L\nT: QTerm\nhalt\n", 2), ErrorCode::HaltWithLiveChildren);
}

TEST(Supervisor, FaultsCarryTheCore) {
  Machine m = Machine::load(assemble("QCreate T,%eno\nhalt\nT: QTerm\nQWait -1\nhalt\n"), cores(2));
  try {
    run_to_halt(m);
    FAIL();
  } catch (const Error& e) {
    ASSERT_TRUE(e.core());
    EXPECT_EQ(*e.core(), 1u);
  }
}

TEST(Supervisor, WaitOnUnknownTargetWarns) {
  Machine m = run("QWait X\nhalt\nX: .long 0\n", 1);
  ASSERT_EQ(m.warnings().size(), 1u);
}

TEST(Supervisor, StallWithoutCoresDeadlocks) {
  // one core: the root cannot create and nothing else can free a core
  EXPECT_EQ(run_error("QCreate T,%eno\nnop\nT: QTerm\nhalt\n", 1), ErrorCode::Deadlock);
}

TEST(Supervisor, StallResumesWhenACoreFrees) {
  Machine m = run(
      "      QCreate T1,%eax\n"
      "      irmovl $1,%eax\n"
      "      nop\n"
      "      nop\n"
      "T1:   QTerm\n"
      "      QCreate T2,%ebx\n"
      "      irmovl $2,%ebx\n"
      "T2:   QTerm\n"
      "      QWait -1\n"
      "      halt\n",
      2);
  EXPECT_EQ(m.core(0).regs[0], 1u);
  EXPECT_EQ(m.core(0).regs[3], 2u);
  const auto created = of_kind(m.trace(), EventKind::QtCreated);
  const auto terminated = of_kind(m.trace(), EventKind::QtTerminated);
  ASSERT_EQ(created.size(), 3u);
  // the second child reuses core 1, strictly after the first released it
  EXPECT_EQ(created[2].core, 1u);
  EXPECT_GT(created[2].cycle, terminated[0].cycle);
}

TEST(Supervisor, SimultaneousCreationsGetDistinctCores) {
  // two children each create a grandchild; their requests meet in the same cycle
  Machine m = run(
      "      QCreate A,%eno\n"
      "      QCreate A1,%eno\n"
      "      nop\n"
      "A1:   QTerm\n"
      "      QWait -1\n"
      "A:    QTerm\n"
      "      QCreate B,%eno\n"
      "      QCreate B1,%eno\n"
      "      nop\n"
      "B1:   QTerm\n"
      "      QWait -1\n"
      "B:    QTerm\n"
      "      QWait -1\n"
      "      halt\n",
      5);
  const auto created = of_kind(m.trace(), EventKind::QtCreated);
  ASSERT_EQ(created.size(), 5u);
  std::vector<std::uint32_t> used;
  for (const auto& e : created) used.push_back(e.core);
  std::sort(used.begin(), used.end());
  EXPECT_EQ(used, (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(Supervisor, GrandchildWaitsForACore) {
  // three cores: the grandchild takes the third; the sibling stalls until one frees
  Machine m = run(
      "      QCreate A,%eax\n"
      "      QCreate A1,%eax\n"
      "      irmovl $1,%eax\n"
      "A1:   QTerm\n"
      "      QWait -1\n"
      "A:    QTerm\n"
      "      QCreate B,%ebx\n"
      "      irmovl $2,%ebx\n"
      "B:    QTerm\n"
      "      QWait -1\n"
      "      halt\n",
      3);
  EXPECT_EQ(m.core(0).regs[0], 1u);
  EXPECT_EQ(m.core(0).regs[3], 2u);
  EXPECT_EQ(m.qts().size(), 4u);
}

TEST(Supervisor, SiblingAndGrandchildOnTwoCoresDeadlock) {
  // the only spare core hosts A, which needs another for A1 while the root needs one for B
  EXPECT_EQ(run_error(
                "      QCreate A,%eax\n"
                "      QCreate A1,%eax\n"
                "      irmovl $1,%eax\n"
                "A1:   QTerm\n"
                "      QWait -1\n"
                "A:    QTerm\n"
                "      QCreate B,%ebx\n"
                "      irmovl $2,%ebx\n"
                "B:    QTerm\n"
                "      QWait -1\n"
                "      halt\n",
                2),
            ErrorCode::Deadlock);
}

TEST(Supervisor, SumupGrantAndDeny) {
  const auto& img = empa::testing::fixture("Qasum5_4.eyo");
  for (std::uint32_t k = 1; k <= 6; ++k) {
    Machine m = empa::testing::load_sum(img, {5, 7, 1, 2}, k);
    run_to_halt(m);
    EXPECT_EQ(m.core(0).regs[0], 15u) << k;
    const auto feeds = of_kind(m.trace(), EventKind::SumFeed);
    if (k >= 5) {
      ASSERT_EQ(feeds.size(), 4u);
      std::vector<std::uint32_t> v;
      for (const auto& f : feeds) v.push_back(*f.payload);
      EXPECT_EQ(v, (std::vector<std::uint32_t>{5, 7, 1, 2}));
      // one creation per cycle
      const auto created = of_kind(m.trace(), EventKind::QtCreated);
      ASSERT_EQ(created.size(), 5u);
      for (std::size_t i = 2; i < created.size(); ++i) EXPECT_EQ(created[i].cycle, created[i - 1].cycle + 1);
    } else {
      EXPECT_TRUE(feeds.empty()) << k;
      EXPECT_EQ(m.qts().size(), 1u);
    }
  }
}

TEST(Supervisor, SumupZeroCount) {
  const auto& img = empa::testing::fixture("Qasum5_4.eyo");
  Machine m = empa::testing::load_sum(img, {}, 2);
  run_to_halt(m);
  EXPECT_EQ(m.core(0).regs[0], 0u);
  EXPECT_EQ(m.qts().size(), 1u);
}

TEST(Supervisor, SumupWrapsAround) {
  const auto& img = empa::testing::fixture("Qasum5_4.eyo");
  Machine m = empa::testing::load_sum(img, {0xFFFFFFFFu, 2, 0x80000000u}, 8);
  run_to_halt(m);
  EXPECT_EQ(m.core(0).regs[0], 0x80000001u);
}

TEST(Supervisor, ForModeAddressesAndSequentialChildren) {
  const auto& img = empa::testing::fixture("Qasum1_4.eyo");
  Machine m = empa::testing::load_sum(img, {5, 7, 1, 2}, 3);
  run_to_halt(m);
  EXPECT_EQ(m.core(0).regs[0], 15u);
  // children see ForChild = 0, 4, 8, 12 in %esv and run one at a time
  std::vector<std::uint32_t> offsets;
  for (const auto& e : m.trace().events()) {
    if (e.kind == EventKind::LatchRead && e.core != 0 && e.payload) offsets.push_back(*e.payload);
  }
  ASSERT_GE(offsets.size(), 4u);
  const auto created = of_kind(m.trace(), EventKind::QtCreated);
  const auto terminated = of_kind(m.trace(), EventKind::QtTerminated);
  ASSERT_EQ(created.size(), 5u);
  for (std::size_t i = 2; i < created.size(); ++i) EXPECT_GT(created[i].cycle, terminated[i - 2].cycle);
}

TEST(Supervisor, ForModeBreaksOnFromChildZero) {
  // each child decrements nothing but clears FromChild when its element is 0
  const char* src =
      "      irmovl $6,%ecx\n"
      "      irmovl Data,%edx\n"
      "      QAlloc 1,%ecx\n"
      "      rrmovl %edx,%esv\n"
      "      QTCreate T,%eno\n"
      "      mrmovl 0(%esv),%eax\n"
      "      rmmovl %eax,Out\n"
      "      andl %eax,%eax\n"
      "      jne T\n"
      "      xorl %eax,%eax\n"
      "      rrmovl %eax,%esv\n"
      "T:    QTerm\n"
      "      QWait -1\n"
      "      rrmovl %esv,%ebx\n"
      "      halt\n"
      "Out:  .long 0\n"
      "Data: .long 4\n"
      "      .long 3\n"
      "      .long 0\n"
      "      .long 9\n"
      "      .long 9\n"
      "      .long 9\n";
  Machine m = run(src, 2);
  const auto created = of_kind(m.trace(), EventKind::QtCreated);
  EXPECT_EQ(created.size(), 1u + 3u);  // j = 2 is the zero: children 0..2
  EXPECT_EQ(m.read_word(*assemble(src).symbol("Out")), 0u);
  EXPECT_EQ(m.core(0).regs[3], 0u);
}

TEST(Supervisor, InvariantsHoldAcrossFixtures) {
  for (const auto& name : {"Qasum0_4.eyo", "Qasum1_4.eyo", "Qasum5_4.eyo", "QasumC_4.eyo", "DynPar.eyo"}) {
    for (std::uint32_t k : {4u, 5u, 8u}) {
      Machine m = Machine::load(empa::testing::fixture(name), cores(k));
      while (!m.halted()) {
        m.tick();
        EXPECT_TRUE(m.pool().partitions()) << name << " k=" << k << " cycle " << m.clock();
      }
    }
  }
}
