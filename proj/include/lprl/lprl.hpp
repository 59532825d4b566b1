#pragma once

#include "lprl/config.hpp"
#include "lprl/construction.hpp"
#include "lprl/error.hpp"
#include "lprl/grid.hpp"
#include "lprl/hierarchy.hpp"
#include "lprl/ladder.hpp"
#include "lprl/numeric.hpp"
#include "lprl/reduction.hpp"
#include "lprl/report.hpp"
#include "lprl/seqspace.hpp"
#include "lprl/verify.hpp"
#include "lprl/witness.hpp"
