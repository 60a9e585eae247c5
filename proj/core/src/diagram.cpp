#include "empa/diagram.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include <fmt/format.h>

namespace empa {

namespace {

constexpr int kCol = 90;   // column width per core
constexpr int kRow = 14;   // height of one cycle
constexpr int kLeft = 60;
constexpr int kTop = 40;

int col_x(std::uint32_t core) { return kLeft + static_cast<int>(core) * kCol; }
int row_y(std::uint64_t cycle) { return kTop + static_cast<int>(cycle) * kRow; }

std::string hex(std::uint32_t v) { return v == kWildcard ? "-1" : fmt::format("{:x}", v); }

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Span {
  std::string id;
  std::uint32_t core;
  std::uint64_t begin;
  std::optional<std::uint64_t> end;
  bool root;
};

std::uint64_t last_cycle(const Trace& t) {
  std::uint64_t m = 0;
  for (const auto& e : t.events()) m = std::max(m, e.cycle);
  return m;
}

}  // namespace

std::string render_diagram(const Trace& trace, const MachineConfig& cfg) {
  const std::uint64_t total = last_cycle(trace);
  std::uint32_t ncores = cfg.cores;
  for (const auto& e : trace.events()) ncores = std::max(ncores, e.core + 1);
  const int width = col_x(ncores) + 20;
  const int height = row_y(total + 2);

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"monospace\" font-size=\"8\">\n",
      width, height);
  svg +=
      "<style>.grid{stroke:#ccc;stroke-width:0.5}.qt-root{fill:#e8f0ff;stroke:#246}"
      ".qt-child{fill:#f4f4f4;stroke:#444}.hook{fill:none;stroke:#000}.instr{fill:#fff;stroke:#000}"
      ".instr-tail{fill:#000}.meta{fill:#ffd;stroke:#960}.wait{fill:none;stroke:#c00}"
      ".sumfeed{fill:#070;font-weight:bold}.idle{fill:#999}</style>\n";

  // grid every 5th cycle
  svg += "<g id=\"grid\">\n";
  for (std::uint64_t c = 0; c <= total; c += 5) {
    svg += fmt::format("<line class=\"grid\" data-cycle=\"{0}\" x1=\"{1}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\"/>\n", c,
                       kLeft - 10, row_y(c), width - 10);
    svg += fmt::format("<text class=\"grid-label\" x=\"4\" y=\"{}\">{}</text>\n", row_y(c) + 3, c);
  }
  for (std::uint32_t i = 0; i < ncores; ++i) {
    svg += fmt::format("<text class=\"core-label\" x=\"{}\" y=\"{}\">core {}</text>\n", col_x(i) + 20, kTop - 16, i);
  }
  svg += "</g>\n";

  // QT lifetimes
  std::vector<Span> spans;
  std::map<std::string, std::size_t> open;
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::QtCreated) {
      open[e.qt] = spans.size();
      spans.push_back(Span{e.qt, e.core, e.cycle, std::nullopt, !e.payload});
    } else if (e.kind == EventKind::QtTerminated) {
      if (auto it = open.find(e.qt); it != open.end()) {
        spans[it->second].end = e.cycle;
        open.erase(it);
      }
    }
  }
  svg += "<g id=\"qts\">\n";
  for (const auto& s : spans) {
    const int x = col_x(s.core) + 20;
    const int y0 = row_y(s.begin);
    const int y1 = row_y(s.end.value_or(total)) + kRow;
    svg += fmt::format(
        "<rect class=\"{}\" data-qt=\"{}\" x=\"{}\" y=\"{}\" width=\"40\" height=\"{}\"/>\n",
        s.root ? "qt-root" : "qt-child", escape(s.id), x, y0, y1 - y0);
    svg += fmt::format("<path class=\"hook\" d=\"M{} {} V{} H{} V{}\"/>\n", x - 4, y0 + 5, y0 - 2, x + 44, y0 + 5);
    svg += fmt::format("<path class=\"hook\" d=\"M{} {} V{} H{} V{}\"/>\n", x - 4, y1 - 5, y1 + 2, x + 44, y1 - 5);
    svg += fmt::format("<text class=\"qt-label\" x=\"{}\" y=\"{}\">{}</text>\n", x + 2, y0 - 4, escape(s.id));
  }
  svg += "</g>\n";

  // per-event marks
  std::map<std::uint32_t, const Event*> wait_open;
  svg += "<g id=\"events\">\n";
  for (const auto& e : trace.events()) {
    const int x = col_x(e.core);
    const int cx = x + 40;
    switch (e.kind) {
      case EventKind::InstrRetired: {
        const std::uint32_t dur = std::max<std::uint32_t>(e.payload.value_or(1), 1);
        const std::uint64_t start = e.cycle + 1 - dur;
        const int y = row_y(start) + kRow / 2;
        svg += fmt::format("<circle class=\"instr\" cx=\"{}\" cy=\"{}\" r=\"6\"/>\n", cx, y);
        svg += fmt::format("<text class=\"addr\" x=\"{}\" y=\"{}\" font-size=\"5\" text-anchor=\"middle\">{}</text>\n",
                           cx, y + 2, hex(e.addr));
        for (std::uint32_t i = 1; i < dur; ++i) {
          svg += fmt::format("<circle class=\"instr-tail\" cx=\"{}\" cy=\"{}\" r=\"2\"/>\n", cx, row_y(start + i) + kRow / 2);
        }
        break;
      }
      case EventKind::MetaRetired: {
        const int y = row_y(e.cycle);
        svg += fmt::format("<rect class=\"meta\" x=\"{}\" y=\"{}\" width=\"24\" height=\"{}\"/>\n", x + 62, y + 2, kRow - 4);
        svg += fmt::format("<text class=\"meta-addr\" x=\"{}\" y=\"{}\">{}</text>\n", x + 64, y + 10, hex(e.addr));
        break;
      }
      case EventKind::WaitBegin:
        wait_open[e.core] = &e;
        break;
      case EventKind::WaitEnd:
      case EventKind::QtTerminated: {
        auto it = wait_open.find(e.core);
        if (it == wait_open.end()) break;
        const Event& b = *it->second;
        for (std::uint64_t c = b.cycle; c <= e.cycle; ++c) {
          svg += fmt::format("<circle class=\"wait\" cx=\"{}\" cy=\"{}\" r=\"4\"/>\n", x + 12, row_y(c) + kRow / 2);
        }
        svg += fmt::format("<text class=\"wait-addr\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", x + 6,
                           row_y(b.cycle) + 10, hex(b.payload.value_or(kWildcard)));
        wait_open.erase(it);
        break;
      }
      case EventKind::LatchRead:
      case EventKind::LatchWrite: {
        const bool rd = e.kind == EventKind::LatchRead;
        svg += fmt::format("<text class=\"{}\" x=\"{}\" y=\"{}\">{}</text>\n", rd ? "esv-read" : "esv-write", cx + 8,
                           row_y(e.cycle) + 10, rd ? "&#8595;" : "&#8593;");
        break;
      }
      case EventKind::SumFeed:
        svg += fmt::format("<text class=\"sumfeed\" x=\"{}\" y=\"{}\">+</text>\n", cx + 14, row_y(e.cycle) + 10);
        break;
      case EventKind::Idle:
        svg += fmt::format("<text class=\"idle\" x=\"{}\" y=\"{}\">z</text>\n", cx - 2, row_y(e.cycle) + kRow + 8);
        break;
      default: break;
    }
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string render_ascii(const Trace& trace) {
  constexpr std::size_t kCell = 12;
  std::uint32_t ncores = 0;
  for (const auto& e : trace.events()) ncores = std::max(ncores, e.core + 1);
  const std::uint64_t total = last_cycle(trace);

  std::string out = fmt::format("{:>6} ", "cycle");
  for (std::uint32_t i = 0; i < ncores; ++i) out += fmt::format("|{:<{}}", fmt::format(" core {}", i), kCell);
  out += "\n";
  out += std::string(7, '-');
  for (std::uint32_t i = 0; i < ncores; ++i) out += "+" + std::string(kCell, '-');
  out += "\n";
  if (trace.empty()) return out;

  std::vector<std::vector<std::string>> cell(total + 1, std::vector<std::string>(ncores));
  std::vector<std::vector<bool>> live(total + 1, std::vector<bool>(ncores, false));
  std::map<std::uint32_t, std::uint64_t> born;
  std::map<std::uint32_t, std::uint64_t> waiting;

  for (const auto& e : trace.events()) {
    auto& here = cell[e.cycle][e.core];
    switch (e.kind) {
      case EventKind::QtCreated:
        here += "[" + e.qt;
        born[e.core] = e.cycle;
        break;
      case EventKind::QtTerminated:
        here += "]";
        if (auto it = born.find(e.core); it != born.end()) {
          for (auto c = it->second; c <= e.cycle; ++c) live[c][e.core] = true;
          born.erase(it);
        }
        break;
      case EventKind::InstrRetired: {
        const std::uint32_t dur = std::max<std::uint32_t>(e.payload.value_or(1), 1);
        const std::uint64_t start = e.cycle + 1 - dur;
        cell[start][e.core] += fmt::format("o{:x}", e.addr);
        for (std::uint64_t c = start + 1; c <= e.cycle; ++c) cell[c][e.core] += ".";
        break;
      }
      case EventKind::MetaRetired: here += fmt::format("M{:x}", e.addr); break;
      case EventKind::WaitBegin:
        here += "w" + hex(e.payload.value_or(kWildcard));
        waiting[e.core] = e.cycle;
        break;
      case EventKind::WaitEnd:
        if (auto it = waiting.find(e.core); it != waiting.end()) {
          for (auto c = it->second + 1; c < e.cycle; ++c) cell[c][e.core] += ":";
          waiting.erase(it);
        }
        here += "W";
        break;
      case EventKind::LatchRead: here += "v"; break;
      case EventKind::LatchWrite: here += "^"; break;
      case EventKind::SumFeed: here += "+"; break;
      case EventKind::Idle: here += "z"; break;
    }
  }
  for (const auto& [core, c0] : born) {
    for (auto c = c0; c <= total; ++c) live[c][core] = true;
  }

  for (std::uint64_t c = 0; c <= total; ++c) {
    out += fmt::format("{:>6} ", c);
    for (std::uint32_t i = 0; i < ncores; ++i) {
      std::string s = cell[c][i];
      if (s.empty() && live[c][i]) s = "|";
      if (s.size() > kCell - 1) s.resize(kCell - 1);
      out += fmt::format("| {:<{}}", s, kCell - 1);
    }
    out += "\n";
  }
  return out;
}

}  // namespace empa
