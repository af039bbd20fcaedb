#pragma once

// Proactive adversary detection over sliding critical windows (safety class)
// and formation-agreement counting (formation class).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rswarm/core.hpp"

namespace rswarm {

enum class AdversaryKind { SafetyAdversary, FormationAdversary };

std::string to_string(AdversaryKind kind);

struct DetectionVerdict {
  AgentId suspect = -1;
  AdversaryKind kind = AdversaryKind::SafetyAdversary;
  double t_detect = 0.0;
  AgentId monitor = -1;     // agent whose monitor fired
  double window = 0.0;      // (n-1) T_s at the window start, or 0 for formation verdicts
  double t_window_start = 0.0;
  std::string evidence;
};

/// Candidate k in {i} U N_i seen by monitor i at one sample.
struct Candidate {
  AgentId id = -1;
  bool deviating = false;  // goal-deviation flag of k
  double score = 0.0;      // k's term in Gamma_i (Gamma_i itself for k = i)
};

/// One sample of monitor i.
struct MonitorSample {
  double t = 0.0;
  bool condition_a = false;  // (1 - S_R) > gamma_S
  double T_s = 0.0;
  std::vector<Candidate> candidates;
};

/// Verdict for the window starting at window.front(), if every sample up to the
/// first one at or after t0 + (n-1) T_s(t0) satisfies both conditions for a common suspect.
std::optional<DetectionVerdict> run_algorithm1(const std::vector<MonitorSample>& window, int n,
                                               AgentId monitor);

/// Online form of run_algorithm1 with a window starting at every sample.
class SafetyDetector {
 public:
  explicit SafetyDetector(int n) : n_(n) {}

  std::optional<DetectionVerdict> update(AgentId monitor, const MonitorSample& sample);

 private:
  struct Streak {
    double start = 0.0;
    double earliest_deadline = 0.0;
    double window = 0.0;  // (n-1) T_s at the start attaining earliest_deadline
    double window_start = 0.0;
  };
  int n_;
  std::map<std::pair<AgentId, AgentId>, Streak> streaks_;
};

struct FormationCheck {
  std::vector<double> confidence;  // C_i per input row
  std::vector<int> deviating;      // |index| per input row
  std::vector<bool> flagged;       // 2 |index| > N_i
};

/// task_metrics[i] holds F_Rij over the formation neighbors of agent i.
FormationCheck run_algorithm2(const std::vector<std::vector<double>>& task_metrics, double gamma_F, int n_c);

/// Suspect choice: highest score, ties to the lower id.
std::optional<Candidate> pick_suspect(const std::vector<Candidate>& firing);

}  // namespace rswarm
