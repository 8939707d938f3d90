#pragma once

#include <string>
#include <utility>
#include <vector>

#include "touchbench/events.hpp"
#include "touchbench/rng.hpp"

namespace testutil {

using touchbench::ActionKind;
using touchbench::ActionTrace;
using touchbench::FingerEvent;
using touchbench::Session;

inline ActionTrace trace_from(const std::vector<std::pair<double, double>>& pts, double dt_ms,
                              double t0 = 0.0) {
  ActionTrace a;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a.events.push_back({pts[i].first, pts[i].second, t0 + dt_ms * static_cast<double>(i)});
  }
  a.kind = a.events.size() < touchbench::kSwipeMinEvents ? ActionKind::Tap : ActionKind::Swipe;
  return a;
}

// Lays actions out back to back with the given gaps (ms) and fills offsets.
inline Session session_from(std::string id, touchbench::Actor actor,
                            std::vector<ActionTrace> actions, const std::vector<double>& gaps_ms,
                            int cluster = 0) {
  Session s;
  s.session_id = std::move(id);
  s.actor = actor;
  s.source = "test";
  s.cluster = cluster;
  s.screen_w = 1080;
  s.screen_h = 1920;
  double cursor = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ActionTrace& a = actions[i];
    if (i > 0) cursor += gaps_ms.at(i - 1);
    const double shift = cursor - a.events.front().t_ms;
    for (auto& e : a.events) e.t_ms += shift;
    cursor = a.events.back().t_ms;
    s.actions.push_back(std::move(a));
  }
  touchbench::recompute_offsets(s);
  return s;
}

// Random valid session for round-trip properties.
inline Session random_session(touchbench::Rng& rng, const std::string& id) {
  std::vector<ActionTrace> acts;
  std::vector<double> gaps;
  const int n = 1 + static_cast<int>(rng.index(5));
  for (int i = 0; i < n; ++i) {
    const int events = 1 + static_cast<int>(rng.index(9));
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < events; ++k) pts.emplace_back(rng.uniform(0, 1080), rng.uniform(0, 1920));
    acts.push_back(trace_from(pts, rng.uniform(1.0, 20.0)));
    if (i > 0) gaps.push_back(rng.uniform(0.0, 9000.0));
  }
  Session s = session_from(id, static_cast<touchbench::Actor>(rng.index(3)), std::move(acts), gaps,
                           static_cast<int>(rng.index(5)));
  if (rng.bernoulli(0.5)) {
    s.sensors.push_back({touchbench::SensorKind::Gyro, rng.uniform(0, 100),
                         {rng.normal(), rng.normal(), rng.normal()}});
    s.sensors.push_back({touchbench::SensorKind::Light, rng.uniform(0, 100), {rng.uniform(0, 900)}});
  }
  return s;
}

}  // namespace testutil
