#include "h2r/env/kinematics.hpp"

namespace h2r::env {

ChainParams default_chain() {
  ChainParams chain;
  chain.links = {
      {0.0, M_PI / 2, 0.1625, 0.0},   {-0.425, 0.0, 0.0, 0.0},
      {-0.3922, 0.0, 0.0, 0.0},       {0.0, M_PI / 2, 0.1333, 0.0},
      {0.0, -M_PI / 2, 0.0997, 0.0},  {0.0, 0.0, 0.0996, 0.0},
  };
  chain.tool_length = 0.05;
  return chain;
}

JointLimits default_limits() {
  JointLimits limits;
  limits.lower = VecX::Constant(6, -2.0 * M_PI);
  limits.upper = VecX::Constant(6, 2.0 * M_PI);
  // Shoulder and elbow stay on the elbow-up branch above the table.
  limits.lower(1) = -M_PI;
  limits.upper(1) = 0.0;
  limits.lower(2) = 0.0;
  limits.upper(2) = M_PI;
  return limits;
}

ChainParams planar_chain(const std::vector<double>& lengths) {
  ChainParams chain;
  for (double l : lengths) chain.links.push_back({l, 0.0, 0.0, 0.0});
  return chain;
}

}  // namespace h2r::env
