#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "touchbench/events.hpp"
#include "touchbench/humanize.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

// Where swipes and taps land. Humans and agents draw their targets from the
// same model, so endpoint features carry no class signal by construction.
struct TargetModel {
  double center_x_frac = 0.5;
  double center_y_frac = 0.55;
  double spread_x_frac = 0.18;
  double spread_y_frac = 0.2;
  double chord_median_px = 420.0;
  double chord_log_sd = 0.4;
  // Share of swipes that run mostly vertically (scrolling).
  double vertical_share = 0.7;
  double direction_sd_rad = 0.25;

  Point sample_point(Rng& rng, int w, int h) const;
  // Start and end of a swipe, both on screen and distinct.
  std::pair<Point, Point> sample_chord(Rng& rng, int w, int h) const;
};

struct HumanProfile {
  double tap_mean_s = 0.075;
  double tap_std_s = 0.015;
  double interval_median_s = 0.8;
  double interval_log_sd = 1.4;
  SwipeDurationModel swipe_duration;
  double arc_scale_px = 30.0;
  double jitter_px = 0.8;
  double event_period_ms = 8.3;
  double swipe_share = 0.5;
};

struct AgentProfile {
  std::string name = "ui-tars-like";
  double interval_lo_s = 5.0;
  double interval_hi_s = 10.0;
  double tap_duration_ms = 3.0;
  double event_period_ms = 11.0;
  double swipe_duration_ms = 200.0;
  double swipe_share = 0.5;
};

AgentProfile ui_tars_like();
AgentProfile mobile_agent_e_like();

struct SynthConfig {
  std::size_t humans = 200;
  std::size_t agents = 200;
  int actions_per_session = 10;
  int clusters = 5;
  int screen_w = 1080;
  int screen_h = 1920;
  double train_fraction = 0.7;
  HumanProfile human;
  // Agent sessions cycle through these profiles.
  std::vector<AgentProfile> agent_profiles{ui_tars_like(), mobile_agent_e_like()};
  TargetModel targets;
  std::uint64_t seed = 7;
};

// Throws InvalidProfile.
void validate(const SynthConfig& cfg);

SynthConfig parse_synth_config(std::istream& in);
std::string synth_config_to_string(const SynthConfig& cfg);

// Minimum-jerk, curved, jittered human swipe. Times start at t0_ms.
ActionTrace human_swipe(Point start, Point end, const HumanProfile& p, Rng& rng, double t0_ms,
                        int w, int h);
ActionTrace human_tap(Point at, const HumanProfile& p, Rng& rng, double t0_ms, int w, int h);
// Straight, evenly spaced agent swipe.
ActionTrace agent_swipe(Point start, Point end, const AgentProfile& p, double t0_ms);
ActionTrace agent_tap(Point at, const AgentProfile& p, double t0_ms);

Session gen_human_session(const std::string& id, int cluster, const SynthConfig& cfg);
Session gen_agent_session(const std::string& id, int cluster, const AgentProfile& profile,
                          const SynthConfig& cfg);

// Human and agent sessions with clusters assigned cyclically and a seeded
// stratified train/test split.
LabeledCorpus gen_corpus(const SynthConfig& cfg);

// One entry per human swipe. With train_only, sessions outside the train
// split are skipped. Throws NoHumanSwipes.
ReferenceDB build_reference_db(const LabeledCorpus& corpus, bool train_only = false);

}  // namespace touchbench
