#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fixsim/errors.hpp"

namespace fixsim {

/// Simulated time kept as an integer tick count so t is always exactly
/// ticks * dt and never drifts.
class SimClock {
 public:
  explicit SimClock(double dt = 0.01) : dt_(dt) {
    if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "clock step must be positive");
  }

  double dt() const { return dt_; }
  std::int64_t ticks() const { return ticks_; }
  double t() const { return static_cast<double>(ticks_) * dt_; }

  void tick() { ++ticks_; }
  void advance_ticks(std::int64_t n) { ticks_ += n; }

  /// Number of whole ticks covering `seconds`.
  std::int64_t ticks_for(double seconds) const {
    if (seconds <= 0.0) return 0;
    return static_cast<std::int64_t>(std::ceil(seconds / dt_ - 1e-9));
  }

  void advance(double seconds) { ticks_ += ticks_for(seconds); }

  void sync_to(std::int64_t ticks) {
    if (ticks > ticks_) ticks_ = ticks;
  }

 private:
  double dt_;
  std::int64_t ticks_{0};
};

enum class Channel { mx, my, mz, fx, fy, fz, laser_depth, commanded_depth, slip };

inline constexpr Channel kAllChannels[] = {Channel::mx, Channel::my, Channel::mz, Channel::fx, Channel::fy,
                                           Channel::fz, Channel::laser_depth, Channel::commanded_depth,
                                           Channel::slip};

inline constexpr std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::mx: return "mx";
    case Channel::my: return "my";
    case Channel::mz: return "mz";
    case Channel::fx: return "fx";
    case Channel::fy: return "fy";
    case Channel::fz: return "fz";
    case Channel::laser_depth: return "laser_depth";
    case Channel::commanded_depth: return "commanded_depth";
    case Channel::slip: return "slip";
  }
  return "?";
}

struct Sample {
  double t;
  double value;
};

struct Trace {
  std::string id;
  Channel channel{Channel::mx};
  std::vector<Sample> samples;
};

/// Registry of traces keyed by id. Samples per trace must be strictly
/// increasing in time.
class TraceSet {
 public:
  void register_trace(const std::string& id, Channel channel) {
    if (!traces_.contains(id)) {
      traces_.emplace(id, Trace{id, channel, {}});
      order_.push_back(id);
    }
  }

  void record(const std::string& id, double t, double value) {
    auto it = traces_.find(id);
    if (it == traces_.end()) fail(ErrorCode::unknown_channel, "trace '" + id + "' is not registered");
    auto& samples = it->second.samples;
    if (!samples.empty() && !(t > samples.back().t))
      fail(ErrorCode::non_monotonic_time, "trace '" + id + "' sample at t=" + std::to_string(t) +
                                              " does not follow t=" + std::to_string(samples.back().t));
    samples.push_back({t, value});
  }

  const Trace& get(const std::string& id) const {
    auto it = traces_.find(id);
    if (it == traces_.end()) fail(ErrorCode::unknown_channel, "trace '" + id + "' is not registered");
    return it->second;
  }

  bool contains(const std::string& id) const { return traces_.contains(id); }

  /// Ids in registration order.
  const std::vector<std::string>& ids() const { return order_; }

 private:
  std::map<std::string, Trace> traces_;
  std::vector<std::string> order_;
};

inline std::string trace_id(std::string_view arm, Channel channel) {
  return std::string(arm) + "_" + std::string(to_string(channel));
}

}  // namespace fixsim
