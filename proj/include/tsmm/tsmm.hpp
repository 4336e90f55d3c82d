#pragma once

#include "tsmm/bench.hpp"
#include "tsmm/cache_model.hpp"
#include "tsmm/compute.hpp"
#include "tsmm/kernel.hpp"
#include "tsmm/pack.hpp"
#include "tsmm/plan.hpp"
#include "tsmm/profile.hpp"
#include "tsmm/select.hpp"
#include "tsmm/trial.hpp"
#include "tsmm/types.hpp"
