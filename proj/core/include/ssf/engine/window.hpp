#pragma once

#include <deque>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/term.hpp"

namespace ssf::engine {

/// Window bounds in ticks. Range(n) at tick t covers (t-n, t]; Now covers
/// exactly t.
struct RuntimeWindow {
  enum class Kind { Now, Range };
  Kind kind = Kind::Now;
  rdf::Tick ticks = 0;

  bool covers(rdf::Tick ts, rdf::Tick now) const {
    if (kind == Kind::Now) return ts == now;
    return ts > now - ticks && ts <= now;
  }

  /// Oldest timestamp any future tick >= now can still see.
  rdf::Tick keep_from(rdf::Tick now) const {
    return kind == Kind::Now ? now : now - ticks + 1;
  }
};

/// Converts a parsed window to ticks under the configured tick length.
RuntimeWindow resolve_window(const ql::WindowSpec& spec, double tick_seconds);

/// Per-(rule, block) buffer of live facts with eviction bookkeeping.
class WindowState {
 public:
  WindowState() = default;
  WindowState(rdf::StreamId stream, RuntimeWindow spec)
      : stream_(std::move(stream)), spec_(spec) {}

  void push(const rdf::TimestampedFact& fact) {
    if (fact.timestamp >= low_watermark_) facts_.push_back(fact);
  }

  /// Drops facts no tick >= now can see; the low watermark never decreases.
  void evict(rdf::Tick now) {
    rdf::Tick keep = spec_.keep_from(now);
    if (keep <= low_watermark_) return;
    low_watermark_ = keep;
    while (!facts_.empty() && facts_.front().timestamp < keep) facts_.pop_front();
    // Out-of-order insertions within the buffer are possible across streams
    // of derived facts; compact the remainder.
    for (auto it = facts_.begin(); it != facts_.end();) {
      if (it->timestamp < keep) {
        it = facts_.erase(it);
      } else {
        ++it;
      }
    }
  }

  const std::deque<rdf::TimestampedFact>& facts() const { return facts_; }
  const rdf::StreamId& stream() const { return stream_; }
  const RuntimeWindow& spec() const { return spec_; }
  rdf::Tick low_watermark() const { return low_watermark_; }

 private:
  rdf::StreamId stream_;
  RuntimeWindow spec_;
  std::deque<rdf::TimestampedFact> facts_;
  rdf::Tick low_watermark_ = 0;
};

}  // namespace ssf::engine
