#include "rswarm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "rswarm/metrics.hpp"

namespace rswarm {

namespace {

constexpr double kTimeEps = 1e-9;

std::string describe(const MonitorSample& s, const Candidate& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "t=%.9g a=%d T_s=%.9g suspect=%d score=%.9g", s.t, s.condition_a ? 1 : 0, s.T_s,
                c.id, c.score);
  return buf;
}

}  // namespace

std::string to_string(AdversaryKind kind) {
  return kind == AdversaryKind::SafetyAdversary ? "safety" : "formation";
}

std::optional<Candidate> pick_suspect(const std::vector<Candidate>& firing) {
  std::optional<Candidate> best;
  for (const auto& c : firing) {
    if (!best || c.score > best->score || (c.score == best->score && c.id < best->id)) best = c;
  }
  return best;
}

std::optional<DetectionVerdict> run_algorithm1(const std::vector<MonitorSample>& window, int n, AgentId monitor) {
  if (window.empty()) return std::nullopt;
  const MonitorSample& first = window.front();
  const double span = (n - 1) * first.T_s;
  const double t_verdict = first.t + span;
  if (window.back().t + kTimeEps < t_verdict) return std::nullopt;

  std::set<AgentId> alive;
  for (const auto& c : first.candidates) {
    if (c.deviating) alive.insert(c.id);
  }
  const MonitorSample* last = &first;
  for (const auto& s : window) {
    last = &s;
    if (!s.condition_a) return std::nullopt;
    std::set<AgentId> still;
    for (const auto& c : s.candidates) {
      if (c.deviating && alive.count(c.id)) still.insert(c.id);
    }
    alive.swap(still);
    if (alive.empty()) return std::nullopt;
    if (s.t + kTimeEps >= t_verdict) break;
  }
  std::vector<Candidate> firing;
  for (const auto& c : last->candidates) {
    if (alive.count(c.id)) firing.push_back(c);
  }
  const auto suspect = pick_suspect(firing);
  if (!suspect) return std::nullopt;
  DetectionVerdict v;
  v.suspect = suspect->id;
  v.kind = AdversaryKind::SafetyAdversary;
  v.t_detect = last->t;
  v.monitor = monitor;
  v.window = span;
  v.t_window_start = first.t;
  v.evidence = describe(*last, *suspect);
  return v;
}

std::optional<DetectionVerdict> SafetyDetector::update(AgentId monitor, const MonitorSample& sample) {
  std::vector<Candidate> firing;
  for (const auto& c : sample.candidates) {
    const auto key = std::make_pair(monitor, c.id);
    if (!(sample.condition_a && c.deviating)) {
      streaks_.erase(key);
      continue;
    }
    const double span = (n_ - 1) * sample.T_s;
    auto it = streaks_.find(key);
    if (it == streaks_.end()) {
      it = streaks_.emplace(key, Streak{sample.t, sample.t + span, span, sample.t}).first;
    } else if (sample.t + span < it->second.earliest_deadline) {
      it->second.earliest_deadline = sample.t + span;
      it->second.window = span;
      it->second.window_start = sample.t;
    }
    if (it->second.earliest_deadline <= sample.t + kTimeEps) firing.push_back(c);
  }
  // Candidates that left {i} U N_i break their streak.
  for (auto it = streaks_.begin(); it != streaks_.end();) {
    const bool present = it->first.first != monitor ||
                         std::any_of(sample.candidates.begin(), sample.candidates.end(),
                                     [&](const Candidate& c) { return c.id == it->first.second; });
    it = present ? std::next(it) : streaks_.erase(it);
  }
  const auto suspect = pick_suspect(firing);
  if (!suspect) return std::nullopt;
  const Streak& st = streaks_.at({monitor, suspect->id});
  DetectionVerdict v;
  v.suspect = suspect->id;
  v.kind = AdversaryKind::SafetyAdversary;
  v.t_detect = sample.t;
  v.monitor = monitor;
  v.window = st.window;
  v.t_window_start = st.window_start;
  v.evidence = describe(sample, *suspect);
  return v;
}

FormationCheck run_algorithm2(const std::vector<std::vector<double>>& task_metrics, double gamma_F, int n_c) {
  FormationCheck out;
  for (const auto& row : task_metrics) {
    const int N = static_cast<int>(row.size());
    int index = 0;
    for (double F : row) {
      if (F < 1.0 - gamma_F) ++index;
    }
    out.deviating.push_back(index);
    if (N == 0) {
      out.confidence.push_back(1.0);
      out.flagged.push_back(false);
      continue;
    }
    out.confidence.push_back(detail::bounded_exp(2.0 * index / N, n_c));
    out.flagged.push_back(2 * index > N);
  }
  return out;
}

}  // namespace rswarm
