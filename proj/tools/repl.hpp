#pragma once

#include <iosfwd>

#include "empa/engine.hpp"

namespace empa::cli {

/// Interactive stepping session over `in`/`out`. Returns the process exit
/// status: 0 normally, 2 if the machine stopped on a runtime error.
int run_repl(Machine& machine, const ObjectImage& image, std::istream& in, std::ostream& out);

}  // namespace empa::cli
