#pragma once

#include "motionopt/foundations.hpp"
#include "motionopt/io.hpp"
#include "motionopt/optimal_sets.hpp"
#include "motionopt/parallel.hpp"
#include "motionopt/priors.hpp"
#include "motionopt/sensitivity.hpp"
#include "motionopt/stochastic.hpp"
#include "motionopt/streams.hpp"
#include "motionopt/svg.hpp"
#include "motionopt/uncertainty.hpp"
