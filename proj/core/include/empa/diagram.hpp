#pragma once

#include <cstdint>
#include <string>

#include "empa/config.hpp"
#include "empa/trace.hpp"

namespace empa {

/// Processing diagram: cores left to right, time downwards. Element classes
/// (grid, qt-root, qt-child, hook, instr, instr-tail, meta, wait, esv-read,
/// esv-write, sumfeed, idle) are stable and meant to be queried.
std::string render_diagram(const Trace& trace, const MachineConfig& cfg);

/// Character-cell counterpart: one row per cycle, one column per core.
std::string render_ascii(const Trace& trace);

}  // namespace empa
