#include <gtest/gtest.h>

#include <vector>

#include "pbsync/kernel.hpp"
#include "pbsync/rng.hpp"

using namespace pbsync;

TEST(Kernel, DispatchesInTimeOrder) {
  Kernel k;
  std::vector<int> seen;
  k.schedule(TrueTime{30}, 0, [&] { seen.push_back(3); });
  k.schedule(TrueTime{10}, 0, [&] { seen.push_back(1); });
  k.schedule(TrueTime{20}, 0, [&] { seen.push_back(2); });
  EXPECT_EQ(k.run_until(TrueTime{100}), 3u);
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(k.now(), TrueTime{100});
}

TEST(Kernel, SimultaneousEventsRunFifo) {
  Kernel k;
  std::vector<int> seen;
  for (int i = 0; i < 50; ++i) k.schedule(TrueTime{7}, 0, [&, i] { seen.push_back(i); });
  k.run_until(TrueTime{7});
  ASSERT_EQ(seen.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(seen[i], i);
}

TEST(Kernel, HandlerMayScheduleAtCurrentInstant) {
  Kernel k;
  std::vector<int> seen;
  k.schedule(TrueTime{5}, 0, [&] {
    seen.push_back(1);
    k.schedule_in(0, 0, [&] { seen.push_back(3); });
  });
  k.schedule(TrueTime{5}, 0, [&] { seen.push_back(2); });
  k.run_until(TrueTime{5});
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
}

TEST(Kernel, PastEventsAreRejected) {
  Kernel k;
  k.run_until(TrueTime{100});
  EXPECT_THROW(k.schedule(TrueTime{99}, 0, [] {}), PastEventError);
  EXPECT_NO_THROW(k.schedule(TrueTime{100}, 0, [] {}));
  EXPECT_THROW(k.run_until(TrueTime{50}), PastEventError);
}

TEST(Kernel, EventsAfterHorizonStayQueued) {
  Kernel k;
  int fired = 0;
  k.schedule(TrueTime{10}, 0, [&] { ++fired; });
  k.schedule(TrueTime{11}, 0, [&] { ++fired; });
  k.run_until(TrueTime{10});
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(k.pending(), 1u);
  k.run_until(TrueTime{11});
  EXPECT_EQ(fired, 2);
}

TEST(Kernel, CancelRemovesOnlyPendingEvents) {
  Kernel k;
  int fired = 0;
  const EventId a = k.schedule(TrueTime{10}, 0, [&] { ++fired; });
  const EventId b = k.schedule(TrueTime{20}, 0, [&] { ++fired; });
  EXPECT_TRUE(k.cancel(b));
  EXPECT_FALSE(k.cancel(b));
  k.run_until(TrueTime{30});
  EXPECT_FALSE(k.cancel(a));
  EXPECT_FALSE(k.cancel(EventId{12345}));
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(k.cancelled_total(), 1u);
  EXPECT_EQ(k.dispatched_total(), 1u);
  EXPECT_EQ(k.scheduled_total(), 2u);
}

TEST(Kernel, TraceRecordsDispatchOrder) {
  Kernel k;
  k.enable_trace(true);
  k.schedule(TrueTime{2}, 4, [] {});
  k.schedule(TrueTime{1}, 9, [] {});
  k.run_until(TrueTime{3});
  ASSERT_EQ(k.trace().size(), 2u);
  EXPECT_EQ(k.trace()[0].target, 9u);
  EXPECT_EQ(k.trace()[0].time, TrueTime{1});
  EXPECT_EQ(k.trace()[1].target, 4u);
}

// Random schedules against a sorted reference list of (time, insertion index).
TEST(Kernel, MatchesSortedReferenceOnRandomSchedules) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    Kernel k;
    std::vector<std::pair<std::uint64_t, int>> expected;
    std::vector<std::pair<std::uint64_t, int>> seen;
    const int n = static_cast<int>(rng.uniform_int(1, 60));
    for (int i = 0; i < n; ++i) {
      const auto t = static_cast<std::uint64_t>(rng.uniform_int(0, 20));
      expected.emplace_back(t, i);
      k.schedule(TrueTime{t}, 0, [&seen, &k, i] { seen.emplace_back(k.now().ns, i); });
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](auto& a, auto& b) { return a.first < b.first; });
    k.run_until(TrueTime{20});
    ASSERT_EQ(seen, expected) << "seed " << seed;
  }
}
