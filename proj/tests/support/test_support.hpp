#pragma once

// Helpers shared by the unit and acceptance suites.

#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "empa/assembler.hpp"
#include "empa/engine.hpp"

namespace empa::testing {

inline std::string fixture_path(const std::string& name) { return std::string(EMPA_FIXTURE_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), {}};
}

inline const ObjectImage& fixture(const std::string& name) {
  // assembled once per process
  static std::map<std::string, ObjectImage> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, assemble(read_text(fixture_path(name)))).first;
  return it->second;
}

inline MachineConfig cores(std::uint32_t n) {
  MachineConfig cfg;
  cfg.cores = n;
  return cfg;
}

/// Loads a sum fixture with `values` stored at Count/Array.
inline Machine load_sum(const ObjectImage& image, const std::vector<std::uint32_t>& values, std::uint32_t ncores) {
  Machine m = Machine::load(image, cores(ncores));
  const std::uint32_t count = *image.symbol("Count");
  const std::uint32_t array = *image.symbol("Array");
  m.write_word(count, static_cast<std::uint32_t>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m.write_word(array + 4 * static_cast<std::uint32_t>(i), values[i]);
  return m;
}

inline std::uint32_t modular_sum(const std::vector<std::uint32_t>& v) {
  std::uint64_t s = 0;
  for (auto x : v) s += x;
  return static_cast<std::uint32_t>(s);  // mod 2^32
}

inline std::vector<std::uint32_t> random_vector(std::mt19937& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::uint32_t> word;
  std::vector<std::uint32_t> v(len(rng));
  for (auto& x : v) x = word(rng);
  return v;
}

inline const std::vector<std::string>& sum_fixtures() {
  static const std::vector<std::string> names = {"Qasum0_4.eyo", "Qasum1_4.eyo", "Qasum5_4.eyo", "QasumC_4.eyo"};
  return names;
}

/// Random straight-line Y86 program: base instructions only, GPRs only,
/// memory traffic confined to a data window and a stack. Ends in halt.
inline std::vector<Instruction> random_straight_line(std::mt19937& rng, std::size_t n) {
  constexpr std::uint32_t kData = 0x800;
  constexpr std::uint32_t kStack = 0xE00;
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> gpr(0, 7);
  std::uniform_int_distribution<int> fn_op(0, 3);
  std::uniform_int_distribution<int> fn_cmov(0, 6);
  std::uniform_int_distribution<std::uint32_t> word;
  std::uniform_int_distribution<std::uint32_t> slot(0, 63);
  std::uniform_int_distribution<int> small(-4, 4);

  auto reg = [&](bool allow_esp) {
    Reg r;
    do r = static_cast<Reg>(gpr(rng));
    while (!allow_esp && r == Reg::esp);
    return r;
  };
  auto imm = [&]() -> std::uint32_t {
    // mix of edge values and random words so flags see overflow cases
    switch (word(rng) % 5) {
      case 0: return static_cast<std::uint32_t>(small(rng));
      case 1: return 0x7fffffffu;
      case 2: return 0x80000000u;
      default: return word(rng);
    }
  };

  std::vector<Instruction> prog;
  prog.push_back({op::irmovl, Reg::none, Reg::esp, kStack});
  std::size_t depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    switch (pick(rng)) {
      case 0: prog.push_back({op::nop, Reg::none, Reg::none, 0}); break;
      case 1: prog.push_back({op::irmovl, Reg::none, reg(false), imm()}); break;
      case 2: prog.push_back({static_cast<std::uint8_t>(op::rrmovl + fn_cmov(rng)), reg(false), reg(false), 0}); break;
      case 3:
      case 4: prog.push_back({static_cast<std::uint8_t>(op::addl + fn_op(rng)), reg(true), reg(false), 0}); break;
      case 5: prog.push_back({op::rmmovl, reg(true), Reg::none, kData + 4 * slot(rng)}); break;
      case 6: prog.push_back({op::mrmovl, reg(false), Reg::none, kData + 4 * slot(rng)}); break;
      case 7:
        prog.push_back({op::pushl, reg(true), Reg::none, 0});
        ++depth;
        break;
      case 8:
        if (depth > 0) {
          prog.push_back({op::popl, reg(false), Reg::none, 0});
          --depth;
        } else {
          prog.push_back({op::nop, Reg::none, Reg::none, 0});
        }
        break;
      default: prog.push_back({static_cast<std::uint8_t>(op::addl + fn_op(rng)), reg(false), reg(false), 0}); break;
    }
  }
  prog.push_back({op::halt, Reg::none, Reg::none, 0});
  return prog;
}

inline std::vector<std::uint8_t> encode_program(const std::vector<Instruction>& prog, std::size_t image = 4096) {
  std::vector<std::uint8_t> mem;
  for (const auto& i : prog) {
    const auto b = encode(i);
    mem.insert(mem.end(), b.begin(), b.end());
  }
  mem.resize(image, 0);
  return mem;
}

}  // namespace empa::testing
