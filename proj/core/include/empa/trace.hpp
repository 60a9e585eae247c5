#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace empa {

enum class EventKind : std::uint8_t {
  QtCreated,     // payload: parent core (none for the root)
  QtTerminated,
  InstrRetired,  // payload: cycles the instruction occupied the core
  MetaRetired,
  WaitBegin,     // payload: waited-for address, 0xffffffff for "all"
  WaitEnd,
  LatchRead,     // payload: value read through %esv
  LatchWrite,    // payload: value written through %esv
  SumFeed,       // payload: summand delivered to the parent's adder
  Idle,          // core returned to the free pool
};

std::string_view kind_name(EventKind k) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view name) noexcept;

struct Event {
  std::uint64_t cycle = 0;
  std::uint32_t core = 0;
  std::string qt;  // "-" when the core hosts no QT
  EventKind kind = EventKind::InstrRetired;
  std::uint32_t addr = 0;
  std::optional<std::uint32_t> payload;

  bool operator==(const Event&) const = default;
};

/// `cycle=<n> core=<n> qt=<id> kind=<k> addr=<hex> payload=<hex|->`
std::string format_event(const Event& e);
/// Throws TraceFormat.
Event parse_event(std::string_view line);

/// Ordered event log of one run.
class Trace {
 public:
  void append(Event e) { events_.push_back(std::move(e)); }
  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  std::string serialize() const;
  void write(std::ostream& out) const;
  static Trace parse(std::string_view text);
  static Trace read(std::istream& in);

  bool operator==(const Trace&) const = default;

 private:
  std::vector<Event> events_;
};

}  // namespace empa
