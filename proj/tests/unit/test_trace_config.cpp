#include <gtest/gtest.h>

#include "empa/config.hpp"
#include "empa/error.hpp"
#include "empa/trace.hpp"

using namespace empa;

TEST(Trace, LineFormatRoundTrip) {
  Event e{12, 3, "Q21", EventKind::SumFeed, 0x22, 7};
  const std::string line = format_event(e);
  EXPECT_EQ(line, "cycle=12 core=3 qt=Q21 kind=SumFeed addr=0x0022 payload=0x7");
  EXPECT_EQ(parse_event(line), e);

  Event idle{5, 1, "", EventKind::Idle, 0, std::nullopt};
  EXPECT_EQ(format_event(idle), "cycle=5 core=1 qt=- kind=Idle addr=0x0000 payload=-");
  EXPECT_EQ(parse_event(format_event(idle)), idle);
}

TEST(Trace, SerializeParse) {
  Trace t;
  t.append({0, 0, "Q", EventKind::QtCreated, 0, std::nullopt});
  t.append({1, 0, "Q", EventKind::InstrRetired, 0, 1});
  t.append({1, 0, "Q", EventKind::QtTerminated, 0, std::nullopt});
  EXPECT_EQ(Trace::parse(t.serialize()), t);
}

TEST(Trace, RejectsMalformedLines) {
  for (const char* bad : {"cycle=1 core=0", "cycle=x core=0 qt=Q kind=Idle addr=0 payload=-",
                          "cycle=1 core=0 qt=Q kind=Nope addr=0 payload=-", "garbage"}) {
    try {
      parse_event(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TraceFormat);
    }
  }
}

TEST(Config, DefaultTiming) {
  const TimingConfig t;
  EXPECT_EQ(t[InstrClass::nop], 1u);
  EXPECT_EQ(t[InstrClass::halt], 1u);
  EXPECT_EQ(t[InstrClass::opl], 1u);
  EXPECT_EQ(t[InstrClass::jxx], 1u);
  EXPECT_EQ(t[InstrClass::mrmovl], 3u);
  EXPECT_EQ(t[InstrClass::rmmovl], 3u);
  EXPECT_EQ(t[InstrClass::call], 2u);
  EXPECT_EQ(t[InstrClass::popl], 2u);
  EXPECT_EQ(t[InstrClass::meta], 1u);
}

TEST(Config, ParseKeyValue) {
  const auto cfg = parse_config("# custom\ncores = 5\ntiming.mrmovl=4\nopl = 2 # slow alu\nwatchdog=99\n");
  EXPECT_EQ(cfg.cores, 5u);
  EXPECT_EQ(cfg.timing[InstrClass::mrmovl], 4u);
  EXPECT_EQ(cfg.timing[InstrClass::opl], 2u);
  EXPECT_EQ(cfg.watchdog, 99u);
}

TEST(Config, Errors) {
  for (const char* bad : {"cores=0", "cores=65", "nop=0", "bogus=1", "cores", "cores=abc"}) {
    try {
      parse_config(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError) << bad;
    }
  }
}
