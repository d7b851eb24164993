#include <atomic>
#include <thread>

#include "service/telemetry_hub.hpp"
#include "support/check.hpp"

using namespace gccnmf;

TEST_CASE("slow subscribers drop old telemetry without affecting others", "[hub]") {
  TelemetryHub hub(4);
  const auto fast = hub.subscribe();
  const auto slow = hub.subscribe();
  std::vector<std::string> fast_seen;
  for (int i = 0; i < 20; ++i) {
    hub.broadcast(true, std::to_string(i));
    auto m = hub.try_pop(fast);
    REQUIRE(m);
    fast_seen.push_back(*m->data);
  }
  REQUIRE(fast_seen.size() == 20);
  for (int i = 0; i < 20; ++i) REQUIRE(fast_seen[static_cast<std::size_t>(i)] == std::to_string(i));
  REQUIRE(hub.dropped(fast) == 0);
  REQUIRE(hub.dropped(slow) == 16);
  // The slow reader keeps the newest frames.
  for (int i = 16; i < 20; ++i) REQUIRE(*hub.try_pop(slow)->data == std::to_string(i));
  REQUIRE_FALSE(hub.try_pop(slow));
  REQUIRE(hub.broadcasts() == 20);
  REQUIRE(hub.total_dropped() == 16);
}

TEST_CASE("directed messages are never dropped and go first", "[hub]") {
  TelemetryHub hub(2);
  const auto id = hub.subscribe();
  for (int i = 0; i < 10; ++i) hub.broadcast(true, "t");
  for (int i = 0; i < 50; ++i) REQUIRE(hub.send_to(id, false, "ack" + std::to_string(i)));
  for (int i = 0; i < 50; ++i) {
    auto m = hub.try_pop(id);
    REQUIRE(m);
    REQUIRE_FALSE(m->binary);
    REQUIRE(*m->data == "ack" + std::to_string(i));
  }
  REQUIRE(*hub.try_pop(id)->data == "t");
  REQUIRE(*hub.try_pop(id)->data == "t");
  REQUIRE_FALSE(hub.try_pop(id));
  REQUIRE(hub.dropped(id) == 8);
}

TEST_CASE("subscription lifecycle", "[hub]") {
  TelemetryHub hub(0);
  REQUIRE(hub.capacity() == 1);
  int notified = 0;
  const auto id = hub.subscribe([&] { ++notified; });
  REQUIRE(hub.subscribers() == 1);
  hub.broadcast(true, "a");
  hub.broadcast(true, "b");
  REQUIRE(notified == 1);  // only the empty to non-empty transition
  REQUIRE(*hub.try_pop(id)->data == "b");
  hub.send_to(id, false, "x");
  REQUIRE(notified == 2);
  hub.unsubscribe(id);
  REQUIRE(hub.subscribers() == 0);
  REQUIRE_FALSE(hub.send_to(id, false, "y"));
  REQUIRE_FALSE(hub.try_pop(id));
  REQUIRE_FALSE(hub.pop_wait(id, 10));
  REQUIRE(hub.total_dropped() == 1);
}

TEST_CASE("publisher never waits on readers", "[hub][concurrency]") {
  TelemetryHub hub(8);
  const auto reader = hub.subscribe();
  const auto idle = hub.subscribe();
  std::atomic<bool> done = false;
  std::size_t received = 0;
  std::thread consumer([&] {
    while (!done.load()) {
      if (hub.pop_wait(reader, 5)) ++received;
    }
  });
  for (int i = 0; i < 5000; ++i) hub.broadcast(true, "frame");
  done = true;
  consumer.join();
  while (hub.try_pop(reader)) ++received;
  REQUIRE(received + hub.dropped(reader) == 5000);
  REQUIRE(hub.dropped(idle) == 5000 - 8);
}
