#pragma once

// Runs the reference Y86 simulator (tests/oracle/yis_ref.py) on a batch of
// programs and returns one result line per program.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "empa/engine.hpp"

namespace empa::testing {

inline std::vector<std::string> reference_results(const std::vector<std::vector<std::uint8_t>>& programs) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto in_path = dir / fmt::format("empa_oracle_{}.in", static_cast<const void*>(&programs));
  {
    std::ofstream in(in_path);
    for (const auto& p : programs) {
      std::size_t end = p.size();
      while (end > 0 && p[end - 1] == 0) --end;
      for (std::size_t i = 0; i < end; ++i) in << fmt::format("{:02x}", p[i]);
      in << (end == 0 ? "00" : "") << "\n";
    }
  }
  const std::string cmd = fmt::format("\"{}\" \"{}\" < \"{}\"", EMPA_PYTHON, EMPA_ORACLE, in_path.string());
  std::vector<std::string> lines;
  if (FILE* f = popen(cmd.c_str(), "r")) {
    std::string cur;
    for (int c; (c = std::fgetc(f)) != EOF;) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur += static_cast<char>(c);
      }
    }
    pclose(f);
  }
  std::filesystem::remove(in_path);
  return lines;
}

/// Same line format as the reference: eight registers, ZF SF OF, status.
inline std::string local_result(const std::vector<std::uint8_t>& program) {
  MachineConfig cfg;
  cfg.cores = 1;
  Machine m = Machine::load(image_from_bytes(program), cfg);
  std::string status = "HLT";
  try {
    run_to_halt(m);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::AddressOutOfRange: status = "ADR"; break;
      case ErrorCode::IllegalOpcode:
      case ErrorCode::InvalidRegister:
      case ErrorCode::TruncatedInstruction: status = "INS"; break;
      default: status = "ERR";
    }
  }
  const auto& c = m.core(0);
  std::string out;
  for (auto r : c.regs) out += fmt::format("{:08x} ", r);
  out += fmt::format("{} {} {} {}", int(c.cc.zf), int(c.cc.sf), int(c.cc.of), status);
  return out;
}

}  // namespace empa::testing
