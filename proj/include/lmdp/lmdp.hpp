#pragma once

#include "budget.hpp"
#include "core.hpp"
#include "dist.hpp"
#include "divergences.hpp"
#include "error.hpp"
#include "generators/augment.hpp"
#include "generators/comb_lock.hpp"
#include "generators/family.hpp"
#include "generators/sat.hpp"
#include "inference.hpp"
#include "learner.hpp"
#include "model.hpp"
#include "planner.hpp"
#include "policy.hpp"
#include "random.hpp"
#include "separation.hpp"
