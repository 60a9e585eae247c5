#include "empa/trace.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "empa/error.hpp"

namespace empa {

namespace {

constexpr std::array<std::string_view, 10> kKindNames = {
    "QtCreated", "QtTerminated", "InstrRetired", "MetaRetired", "WaitBegin",
    "WaitEnd",   "LatchRead",    "LatchWrite",   "SumFeed",     "Idle"};

template <typename T>
T parse_int(std::string_view s, int base, std::string_view line) {
  if (base == 16 && s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::TraceFormat, fmt::format("bad number '{}' in trace line '{}'", s, line));
  }
  return v;
}

}  // namespace

std::string_view kind_name(EventKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string format_event(const Event& e) {
  return fmt::format("cycle={} core={} qt={} kind={} addr=0x{:04x} payload={}", e.cycle, e.core,
                     e.qt.empty() ? "-" : e.qt, kind_name(e.kind), e.addr,
                     e.payload ? fmt::format("0x{:x}", *e.payload) : std::string("-"));
}

Event parse_event(std::string_view line) {
  Event e;
  unsigned seen = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view field = line.substr(pos, end - pos);
    pos = end;
    auto eq = field.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::TraceFormat, fmt::format("field without '=' in '{}'", line));
    }
    std::string_view key = field.substr(0, eq);
    std::string_view val = field.substr(eq + 1);
    if (key == "cycle") {
      e.cycle = parse_int<std::uint64_t>(val, 10, line);
      seen |= 1;
    } else if (key == "core") {
      e.core = parse_int<std::uint32_t>(val, 10, line);
      seen |= 2;
    } else if (key == "qt") {
      e.qt = val == "-" ? std::string() : std::string(val);
      seen |= 4;
    } else if (key == "kind") {
      auto k = parse_event_kind(val);
      if (!k) throw Error(ErrorCode::TraceFormat, fmt::format("unknown event kind '{}'", val));
      e.kind = *k;
      seen |= 8;
    } else if (key == "addr") {
      e.addr = parse_int<std::uint32_t>(val, 16, line);
      seen |= 16;
    } else if (key == "payload") {
      if (val != "-" && !val.empty()) e.payload = parse_int<std::uint32_t>(val, 16, line);
      seen |= 32;
    }
  }
  if (seen != 63) throw Error(ErrorCode::TraceFormat, fmt::format("incomplete trace line '{}'", line));
  return e;
}

std::string Trace::serialize() const {
  std::string out;
  out.reserve(events_.size() * 72);
  for (const auto& e : events_) {
    out += format_event(e);
    out.push_back('\n');
  }
  return out;
}

void Trace::write(std::ostream& out) const {
  for (const auto& e : events_) out << format_event(e) << '\n';
}

Trace Trace::parse(std::string_view text) {
  Trace t;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') t.append(parse_event(line));
    pos = nl + 1;
  }
  return t;
}

Trace Trace::read(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace empa
