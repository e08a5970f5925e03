#ifndef FASTFLOW_AGENT_HPP
#define FASTFLOW_AGENT_HPP

#include "geometry.hpp"

namespace fastflow {

struct Agent {
  int id = 0;
  Cell pos;
  Vec2i vel;  ///< realized displacement of the previous round
  int v_max = 3;
  Species species = Species::Rightward;

  double speed() const { return vel.norm(); }
};

}  // namespace fastflow

#endif  // FASTFLOW_AGENT_HPP
