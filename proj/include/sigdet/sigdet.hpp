#pragma once

#include "sigdet/belief.hpp"
#include "sigdet/config.hpp"
#include "sigdet/decision.hpp"
#include "sigdet/dynamics.hpp"
#include "sigdet/error.hpp"
#include "sigdet/evaluator.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/numeric.hpp"
#include "sigdet/profile.hpp"
#include "sigdet/solver.hpp"
#include "sigdet/strategy.hpp"
