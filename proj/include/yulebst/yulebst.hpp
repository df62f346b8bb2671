#pragma once

#include "yulebst/rng.hpp"
#include "yulebst/tree.hpp"
#include "yulebst/bst.hpp"
#include "yulebst/yule.hpp"
#include "yulebst/rational.hpp"
#include "yulebst/martingales.hpp"
#include "yulebst/exact.hpp"
#include "yulebst/tilted.hpp"
#include "yulebst/stats.hpp"
