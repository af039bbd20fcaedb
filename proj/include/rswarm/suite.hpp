#pragma once

// Bundled case studies.

#include <string>
#include <vector>

#include "rswarm/scenario.hpp"

namespace rswarm {

enum class Case1Variant { Nominal, ChaseNoDefense, ChaseDetectOnly, ChaseResilient };
enum class Case2Variant { Nominal, TwoAdversaries, TwoAdversariesResilient };

/// Three unicycles, two obstacles; agent 1 chases agent 2 in the chase variants.
Scenario generate_case1(Case1Variant variant);

/// Six-agent hexagon formation; agents 3 and 6 mislead in the adversarial variants.
Scenario generate_case2(Case2Variant variant);

struct BundledScenario {
  std::string file;  // e.g. case1_nominal.json
  Scenario scenario;
};

/// Every bundled scenario in a fixed order.
std::vector<BundledScenario> bundled_scenarios();

}  // namespace rswarm
