#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gccnmf {

struct OutboundMessage {
  bool binary = true;
  std::shared_ptr<const std::string> data;
};

// Broadcast fan-out with one bounded queue per subscriber. Broadcasts that
// find a queue full evict its oldest broadcast and count a drop, so publish()
// never waits on a slow reader. Directed messages (acks) are never dropped.
class TelemetryHub {
 public:
  explicit TelemetryHub(std::size_t capacity = 16) : capacity_(capacity ? capacity : 1) {}

  using Notify = std::function<void()>;

  // `notify` is called (from the publishing thread) whenever the subscriber's
  // queue goes from empty to non-empty.
  std::uint64_t subscribe(Notify notify = {});
  void unsubscribe(std::uint64_t id);

  void broadcast(bool binary, std::string data);
  // Returns false when the subscriber is gone.
  bool send_to(std::uint64_t id, bool binary, std::string data);

  std::optional<OutboundMessage> try_pop(std::uint64_t id);
  // Blocks up to `timeout_ms`; used by polling clients and tests.
  std::optional<OutboundMessage> pop_wait(std::uint64_t id, int timeout_ms);

  std::uint64_t dropped(std::uint64_t id) const;
  std::uint64_t total_dropped() const;
  std::uint64_t broadcasts() const;
  std::size_t subscribers() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  struct Subscriber {
    std::deque<OutboundMessage> directed;
    std::deque<OutboundMessage> broadcast;
    std::uint64_t dropped = 0;
    Notify notify;
  };
  std::optional<OutboundMessage> take_locked(Subscriber& s);

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::map<std::uint64_t, Subscriber> subs_;
  std::uint64_t next_id_ = 1;
  std::uint64_t broadcasts_ = 0;
  std::uint64_t dropped_departed_ = 0;
};

}  // namespace gccnmf
