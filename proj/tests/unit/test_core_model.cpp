#include <gtest/gtest.h>

#include <vector>

#include "empa/core_model.hpp"
#include "empa/error.hpp"

using namespace empa;

namespace {

struct Bench {
  CoreState core;
  std::vector<std::uint8_t> mem = std::vector<std::uint8_t>(1024, 0);

  CoreEvent run(const Instruction& i) {
    const auto enc = encode(i);
    std::copy(enc.begin(), enc.end(), mem.begin() + core.pc);
    return step_instruction(core, mem);
  }
};

}  // namespace

TEST(MapEsv, TableCells) {
  EXPECT_EQ(map_esv(EsvContext::Cloning, Access::Read), Latch::ForParent);
  EXPECT_EQ(map_esv(EsvContext::Cloning, Access::Write), Latch::FromChild);
  EXPECT_EQ(map_esv(EsvContext::MassChild, Access::Read), Latch::FromParent);
  EXPECT_EQ(map_esv(EsvContext::MassChild, Access::Write), Latch::ForParent);
  EXPECT_EQ(map_esv(EsvContext::MassPre, Access::Read), Latch::FromParent);
  EXPECT_EQ(map_esv(EsvContext::MassPre, Access::Write), Latch::ForChild);
  EXPECT_EQ(map_esv(EsvContext::MassPost, Access::Read), Latch::FromChild);
  EXPECT_EQ(map_esv(EsvContext::MassPost, Access::Write), Latch::ForParent);
  EXPECT_EQ(map_esv(EsvContext::General, Access::Read), Latch::FromChild);
  EXPECT_EQ(map_esv(EsvContext::General, Access::Write), Latch::ForParent);
}

TEST(MapEsv, PhaseSelection) {
  EXPECT_EQ(esv_context(Phase::MassChild), EsvContext::MassChild);
  EXPECT_EQ(esv_context(Phase::MassPre), EsvContext::MassPre);
  EXPECT_EQ(esv_context(Phase::MassPost), EsvContext::MassPost);
  EXPECT_EQ(esv_context(Phase::General), EsvContext::General);
  EXPECT_EQ(esv_context(Phase::None), EsvContext::General);
}

TEST(Step, EsvToEsvForwardsFromParent) {
  Bench b;
  b.core.phase = Phase::MassChild;
  b.core.latches.from_parent = 0x1234;
  const auto ev = b.run({op::rrmovl, Reg::esv, Reg::esv, 0});
  EXPECT_EQ(b.core.latches.for_parent, 0x1234u);
  EXPECT_TRUE(b.core.for_parent_written);
  ASSERT_EQ(ev.latch_accesses.size(), 2u);
  EXPECT_EQ(ev.latch_accesses[0].access, Access::Read);
  EXPECT_EQ(ev.latch_accesses[0].latch, Latch::FromParent);
  EXPECT_EQ(ev.latch_accesses[1].access, Access::Write);
  EXPECT_EQ(ev.latch_accesses[1].latch, Latch::ForParent);
}

TEST(Step, AddSetsFlags) {
  Bench b;
  b.core.regs[1] = 3;
  b.core.regs[0] = 4;
  b.run({op::addl, Reg::ecx, Reg::eax, 0});
  EXPECT_EQ(b.core.regs[0], 7u);
  EXPECT_FALSE(b.core.cc.zf);
  EXPECT_FALSE(b.core.cc.sf);
  EXPECT_FALSE(b.core.cc.of);
  EXPECT_EQ(b.core.pc, 2u);
}

TEST(Step, OverflowFlags) {
  Bench b;
  b.core.regs[0] = 0x7fffffff;
  b.core.regs[1] = 1;
  b.run({op::addl, Reg::ecx, Reg::eax, 0});
  EXPECT_TRUE(b.core.cc.of);
  EXPECT_TRUE(b.core.cc.sf);
  b.core.regs[0] = 0x80000000;
  b.core.regs[1] = 1;
  b.run({op::subl, Reg::ecx, Reg::eax, 0});  // INT_MIN - 1
  EXPECT_EQ(b.core.regs[0], 0x7fffffffu);
  EXPECT_TRUE(b.core.cc.of);
  b.run({op::xorl, Reg::eax, Reg::eax, 0});
  EXPECT_TRUE(b.core.cc.zf);
  EXPECT_FALSE(b.core.cc.of);
}

TEST(Step, LoadThroughEsvInMassChild) {
  Bench b;
  b.core.phase = Phase::MassChild;
  b.core.latches.from_parent = 0x200;
  store_word(b.mem, 0x200, 5);
  b.core.pc = 0x10;
  const auto ev = b.run({op::mrmovl, Reg::eax, Reg::esv, 0});
  EXPECT_EQ(b.core.regs[0], 5u);
  ASSERT_EQ(ev.latch_accesses.size(), 1u);
  EXPECT_EQ(ev.latch_accesses[0].latch, Latch::FromParent);
  EXPECT_EQ(ev.latch_accesses[0].value, 0x200u);
}

TEST(Step, PseudoRegisters) {
  Bench b;
  b.core.regs[2] = 99;
  b.run({op::rrmovl, Reg::edx, Reg::eno, 0});  // swallowed
  b.run({op::rrmovl, Reg::eno, Reg::edx, 0});
  EXPECT_EQ(b.core.regs[2], 0u);

  b.core.qt = QTDescriptor{};
  b.core.qt->sibling_index = 3;
  b.run({op::rrmovl, Reg::ecc, Reg::ebx, 0});
  EXPECT_EQ(b.core.regs[3], 3u);
  try {
    b.run({op::irmovl, Reg::none, Reg::ecc, 1});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WriteToEcc);
  }
}

TEST(Step, StackEdgeCases) {
  Bench b;
  b.core.regs[4] = 0x100;
  b.run({op::pushl, Reg::esp, Reg::none, 0});
  EXPECT_EQ(load_word(b.mem, 0xFC), 0x100u);  // old value pushed
  EXPECT_EQ(b.core.regs[4], 0xFCu);
  store_word(b.mem, 0xFC, 0x40);
  b.run({op::popl, Reg::esp, Reg::none, 0});
  EXPECT_EQ(b.core.regs[4], 0x40u);  // popped value wins
}

TEST(Step, ControlFlow) {
  Bench b;
  b.core.regs[4] = 0x300;
  b.run({op::call, Reg::none, Reg::none, 0x80});
  EXPECT_EQ(b.core.pc, 0x80u);
  EXPECT_EQ(load_word(b.mem, 0x2FC), 5u);
  b.run({op::ret, Reg::none, Reg::none, 0});
  EXPECT_EQ(b.core.pc, 5u);
  b.core.cc = {false, true, false};  // less
  b.run({op::jl, Reg::none, Reg::none, 0x40});
  EXPECT_EQ(b.core.pc, 0x40u);
  b.run({op::jg, Reg::none, Reg::none, 0x80});
  EXPECT_EQ(b.core.pc, 0x45u);
  const auto ev = b.run({op::halt, Reg::none, Reg::none, 0});
  EXPECT_TRUE(ev.halted);
  EXPECT_EQ(b.core.pc, 0x45u);
}

TEST(Step, MetaInstructionsOnlyRequest) {
  Bench b;
  b.core.regs[1] = 4;
  const auto ev = b.run({op::qalloc, Reg::ecx, Reg::none, 5});
  ASSERT_TRUE(ev.meta);
  EXPECT_EQ(ev.meta->reg_value, 4u);
  EXPECT_EQ(ev.meta->next_pc, 6u);
  EXPECT_EQ(b.core.pc, 0u);
  EXPECT_EQ(b.core.mode, 0u);
}

TEST(Step, Faults) {
  Bench b;
  b.mem[0] = 0xC3;
  try {
    step_instruction(b.core, b.mem);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllegalOpcode);
  }
  try {
    b.run({op::mrmovl, Reg::eax, Reg::none, 0x5000});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AddressOutOfRange);
  }
}

TEST(Clone, CopiesStateAndLatch) {
  CoreState parent, child;
  parent.regs = {10, 1, 2, 3, 4, 5, 6, 7};
  parent.cc = {false, true, true};
  parent.latches.for_child = 0x200;
  parent.mode = 5;
  child.qt = QTDescriptor{};
  clone_into(parent, child, Reg::eno);
  EXPECT_EQ(child.regs, parent.regs);
  EXPECT_EQ(child.cc, parent.cc);
  EXPECT_EQ(child.latches.from_parent, 0x200u);
  EXPECT_EQ(child.parent_mode, 5u);
  EXPECT_EQ(child.qt->link, Reg::eno);
}
