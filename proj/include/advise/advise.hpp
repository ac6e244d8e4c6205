#pragma once

#include "advise/action.hpp"
#include "advise/compare.hpp"
#include "advise/config.hpp"
#include "advise/consistency.hpp"
#include "advise/csv.hpp"
#include "advise/environment.hpp"
#include "advise/error.hpp"
#include "advise/experiment.hpp"
#include "advise/feedback.hpp"
#include "advise/q_learning.hpp"
#include "advise/random.hpp"
#include "advise/state.hpp"
#include "advise/trainer.hpp"
