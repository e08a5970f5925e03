#ifndef FASTFLOW_FASTFLOW_HPP
#define FASTFLOW_FASTFLOW_HPP

#include "agent.hpp"
#include "counterflow.hpp"
#include "experiment.hpp"
#include "geometry.hpp"
#include "kinematics.hpp"
#include "lattice.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "scenario.hpp"

#endif  // FASTFLOW_FASTFLOW_HPP
