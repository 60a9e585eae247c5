// empa: assembler, simulator and analysis front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "empa/assembler.hpp"
#include "empa/diagram.hpp"
#include "empa/engine.hpp"
#include "empa/error.hpp"
#include "empa/stats.hpp"
#include "repl.hpp"

namespace fs = std::filesystem;
using namespace empa;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot read '{}'", p.string()));
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream f(p, std::ios::binary);
  if (!f || !f.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", p.string()));
  }
}

ObjectImage load_program(const fs::path& p) {
  const std::string data = read_file(p);
  if (p.extension() == ".eyo" || p.extension() == ".ys") return assemble(data);
  return image_from_bytes({data.begin(), data.end()});
}

std::uint64_t parse_baseline(const std::string& arg) {
  // a bare number, or a stats/cycles file holding `totalCycles=N` or just N
  auto number = [](std::string_view s) -> std::optional<std::uint64_t> {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  if (auto v = number(arg)) return *v;
  const std::string text = read_file(arg);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("totalCycles=", 0) == 0) {
      if (auto v = number(std::string_view(line).substr(12))) return *v;
    }
    if (auto v = number(line)) return *v;
  }
  throw Error(ErrorCode::ConfigError, fmt::format("no cycle count in baseline '{}'", arg));
}

MachineConfig machine_config(std::uint32_t cores, const std::string& timing_file) {
  MachineConfig cfg;
  if (!timing_file.empty()) cfg = parse_config(read_file(timing_file));
  cfg.cores = cores;
  cfg.validate();
  return cfg;
}

// `SYMBOL=VALUE`, `SYMBOL+OFFSET=VALUE` or `ADDR=VALUE`
void apply_poke(Machine& m, const ObjectImage& image, const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, fmt::format("bad --poke '{}'", arg));
  std::string where = arg.substr(0, eq);
  std::uint32_t offset = 0;
  if (auto plus = where.find('+'); plus != std::string::npos) {
    offset = static_cast<std::uint32_t>(std::stoul(where.substr(plus + 1), nullptr, 0));
    where.resize(plus);
  }
  std::uint32_t addr = 0;
  if (auto s = image.symbol(where)) {
    addr = *s;
  } else {
    try {
      addr = static_cast<std::uint32_t>(std::stoul(where, nullptr, 0));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, fmt::format("unknown symbol '{}' in --poke", where));
    }
  }
  const auto value = static_cast<std::uint32_t>(std::stoll(arg.substr(eq + 1), nullptr, 0));
  m.write_word(addr + offset, value);
}

struct RunOptions {
  std::string input;
  std::uint32_t cores = 8;
  std::string timing;
  std::string trace_out;
  std::string diagram_out;
  std::string ascii_out;
  bool stats = false;
  std::string stats_out;
  std::string baseline;
  std::vector<std::string> pokes;
};

void print_root(const Machine& m) {
  const auto& c = m.core(0);
  std::string regs;
  for (std::uint8_t r = 0; r < kGprCount; ++r) {
    regs += fmt::format("{}{}=0x{:08x}", r ? " " : "", reg_name(static_cast<Reg>(r)), c.regs[r]);
  }
  fmt::print("{}\n", regs);
}

int cmd_run(const RunOptions& o) {
  const ObjectImage image = load_program(o.input);
  Machine m = Machine::load(image, machine_config(o.cores, o.timing));
  for (const auto& p : o.pokes) apply_poke(m, image, p);

  int status = 0;
  try {
    run_to_halt(m);
  } catch (const Error& e) {
    if (!is_runtime_error(e.code())) throw;
    fmt::print(stderr, "empa: runtime error [{}]: {}\n", to_string(e.code()), e.what());
    status = 2;
  }
  for (const auto& w : m.warnings()) fmt::print(stderr, "warning: {}\n", w);

  // artifacts are written even for a failed run: the partial trace is the evidence
  if (!o.trace_out.empty()) write_file(o.trace_out, m.trace().serialize());
  if (!o.diagram_out.empty()) write_file(o.diagram_out, render_diagram(m.trace(), m.config()));
  if (!o.ascii_out.empty()) write_file(o.ascii_out, render_ascii(m.trace()));
  if (status != 0) return status;

  std::optional<std::uint64_t> baseline;
  if (!o.baseline.empty()) baseline = parse_baseline(o.baseline);
  const Stats s = compute_stats(m.trace(), o.cores, baseline);

  fmt::print("totalCycles={}\n", m.clock());
  print_root(m);
  if (baseline) fmt::print("speedup={:.2f} alphaEff={:.2f}\n", require_speedup(s), *s.alpha_eff);
  if (o.stats) fmt::print("{}", format_stats(s));
  if (!o.stats_out.empty()) write_file(o.stats_out, stats_kv(s));
  return 0;
}

int cmd_asm(const std::string& input, std::string output) {
  const std::string src = read_file(input);
  const ObjectImage image = assemble(src);
  fs::path listing = output.empty() ? fs::path(input).replace_extension(".yo") : fs::path(output);
  fs::path raw = listing;
  raw.replace_extension(".img");
  write_file(listing, write_listing(image));
  write_file(raw, std::string_view(reinterpret_cast<const char*>(image.memory.data()), image.memory.size()));
  return 0;
}

int cmd_stats(const std::string& trace_file, std::uint32_t cores, const std::string& baseline_arg,
              const std::string& out) {
  const Trace t = Trace::parse(read_file(trace_file));
  std::optional<std::uint64_t> baseline;
  if (!baseline_arg.empty()) baseline = parse_baseline(baseline_arg);
  const Stats s = compute_stats(t, cores, baseline);
  fmt::print("{}", format_stats(s));
  if (!out.empty()) write_file(out, stats_kv(s));
  return 0;
}

int cmd_diagram(const std::string& trace_file, std::uint32_t cores, const std::string& out, bool ascii) {
  const Trace t = Trace::parse(read_file(trace_file));
  MachineConfig cfg;
  cfg.cores = cores;
  const std::string text = ascii ? render_ascii(t) : render_diagram(t, cfg);
  if (out.empty()) {
    fmt::print("{}", text);
  } else {
    write_file(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMPA-extended Y86 assembler and many-core simulator", "empa"};
  app.require_subcommand(1);

  std::string asm_in, asm_out;
  auto* sub_asm = app.add_subcommand("asm", "assemble an .eyo source into a listing and a raw image");
  sub_asm->add_option("input", asm_in, "source file")->required()->check(CLI::ExistingFile);
  sub_asm->add_option("-o,--output", asm_out, "listing path (image goes beside it as .img)");

  RunOptions ro;
  auto* sub_run = app.add_subcommand("run", "run a program to completion");
  sub_run->add_option("input", ro.input, ".eyo source or raw image")->required()->check(CLI::ExistingFile);
  sub_run->add_option("--cores", ro.cores, "number of cores (1-64)")
      ->envname("EMPA_CORES")
      ->check(CLI::Range(1, 64));
  sub_run->add_option("--timing", ro.timing, "key=value timing/config file")->check(CLI::ExistingFile);
  sub_run->add_option("--trace", ro.trace_out, "write the event trace");
  sub_run->add_option("--diagram", ro.diagram_out, "write the processing diagram (SVG)");
  sub_run->add_option("--ascii", ro.ascii_out, "write the processing diagram (text)");
  sub_run->add_flag("--stats", ro.stats, "print statistics");
  sub_run->add_option("--stats-out", ro.stats_out, "write key=value statistics");
  sub_run->add_option("--baseline", ro.baseline, "baseline cycle count or file with totalCycles=");
  sub_run->add_option("--poke", ro.pokes, "store a word before the run: SYMBOL[+OFF]=VALUE or ADDR=VALUE");

  std::string step_in, step_timing;
  std::uint32_t step_cores = 8;
  std::vector<std::string> step_pokes;
  auto* sub_step = app.add_subcommand("step", "interactive cycle-by-cycle session");
  sub_step->add_option("input", step_in, ".eyo source or raw image")->required()->check(CLI::ExistingFile);
  sub_step->add_option("--cores", step_cores, "number of cores (1-64)")
      ->envname("EMPA_CORES")
      ->check(CLI::Range(1, 64));
  sub_step->add_option("--timing", step_timing, "key=value timing/config file")->check(CLI::ExistingFile);
  sub_step->add_option("--poke", step_pokes, "store a word before the run");

  std::string st_trace, st_baseline, st_out;
  std::uint32_t st_cores = 8;
  auto* sub_stats = app.add_subcommand("stats", "statistics of a recorded trace");
  sub_stats->add_option("trace", st_trace, "trace file")->required()->check(CLI::ExistingFile);
  sub_stats->add_option("--cores", st_cores, "cores the run had (k)")->envname("EMPA_CORES")->check(CLI::Range(1, 64));
  sub_stats->add_option("--baseline", st_baseline, "baseline cycle count or file");
  sub_stats->add_option("-o,--output", st_out, "write key=value statistics");

  std::string dg_trace, dg_out;
  std::uint32_t dg_cores = 1;
  bool dg_ascii = false;
  auto* sub_diag = app.add_subcommand("diagram", "render a recorded trace");
  sub_diag->add_option("trace", dg_trace, "trace file")->required()->check(CLI::ExistingFile);
  sub_diag->add_option("--cores", dg_cores, "minimum number of columns")->check(CLI::Range(1, 64));
  sub_diag->add_option("-o,--output", dg_out, "output file (default: stdout)");
  sub_diag->add_flag("--ascii", dg_ascii, "text rendering instead of SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sub_asm) return cmd_asm(asm_in, asm_out);
    if (*sub_run) return cmd_run(ro);
    if (*sub_stats) return cmd_stats(st_trace, st_cores, st_baseline, st_out);
    if (*sub_diag) return cmd_diagram(dg_trace, dg_cores, dg_out, dg_ascii);
    if (*sub_step) {
      const ObjectImage image = load_program(step_in);
      Machine m = Machine::load(image, machine_config(step_cores, step_timing));
      for (const auto& p : step_pokes) apply_poke(m, image, p);
      return cli::run_repl(m, image, std::cin, std::cout);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "empa: {} [{}]\n", e.what(), to_string(e.code()));
    return is_runtime_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "empa: {}\n", e.what());
    return 1;
  }
  return 1;
}
