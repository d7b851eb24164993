#include "service/telemetry_hub.hpp"

#include <chrono>

namespace gccnmf {

std::uint64_t TelemetryHub::subscribe(Notify notify) {
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  subs_[id].notify = std::move(notify);
  return id;
}

void TelemetryHub::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(mutex_);
  auto it = subs_.find(id);
  if (it == subs_.end()) return;
  dropped_departed_ += it->second.dropped;
  subs_.erase(it);
  ready_.notify_all();
}

void TelemetryHub::broadcast(bool binary, std::string data) {
  auto shared = std::make_shared<const std::string>(std::move(data));
  std::vector<Notify> wake;
  {
    std::lock_guard lock(mutex_);
    ++broadcasts_;
    for (auto& [id, s] : subs_) {
      const bool was_empty = s.directed.empty() && s.broadcast.empty();
      if (s.broadcast.size() >= capacity_) {
        s.broadcast.pop_front();
        ++s.dropped;
      }
      s.broadcast.push_back({binary, shared});
      if (was_empty && s.notify) wake.push_back(s.notify);
    }
  }
  ready_.notify_all();
  for (auto& n : wake) n();
}

bool TelemetryHub::send_to(std::uint64_t id, bool binary, std::string data) {
  Notify wake;
  {
    std::lock_guard lock(mutex_);
    auto it = subs_.find(id);
    if (it == subs_.end()) return false;
    auto& s = it->second;
    const bool was_empty = s.directed.empty() && s.broadcast.empty();
    s.directed.push_back({binary, std::make_shared<const std::string>(std::move(data))});
    if (was_empty) wake = s.notify;
  }
  ready_.notify_all();
  if (wake) wake();
  return true;
}

std::optional<OutboundMessage> TelemetryHub::take_locked(Subscriber& s) {
  // Acks go out ahead of queued telemetry.
  auto& q = !s.directed.empty() ? s.directed : s.broadcast;
  if (q.empty()) return std::nullopt;
  OutboundMessage m = std::move(q.front());
  q.pop_front();
  return m;
}

std::optional<OutboundMessage> TelemetryHub::try_pop(std::uint64_t id) {
  std::lock_guard lock(mutex_);
  auto it = subs_.find(id);
  if (it == subs_.end()) return std::nullopt;
  return take_locked(it->second);
}

std::optional<OutboundMessage> TelemetryHub::pop_wait(std::uint64_t id, int timeout_ms) {
  std::unique_lock lock(mutex_);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    auto it = subs_.find(id);
    if (it == subs_.end()) return std::nullopt;
    if (auto m = take_locked(it->second)) return m;
    if (ready_.wait_until(lock, deadline) == std::cv_status::timeout) {
      it = subs_.find(id);
      return it == subs_.end() ? std::nullopt : take_locked(it->second);
    }
  }
}

std::uint64_t TelemetryHub::dropped(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  auto it = subs_.find(id);
  return it == subs_.end() ? 0 : it->second.dropped;
}

std::uint64_t TelemetryHub::total_dropped() const {
  std::lock_guard lock(mutex_);
  std::uint64_t n = dropped_departed_;
  for (const auto& [id, s] : subs_) n += s.dropped;
  return n;
}

std::uint64_t TelemetryHub::broadcasts() const {
  std::lock_guard lock(mutex_);
  return broadcasts_;
}

std::size_t TelemetryHub::subscribers() const {
  std::lock_guard lock(mutex_);
  return subs_.size();
}

}  // namespace gccnmf
