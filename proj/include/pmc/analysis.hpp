#pragma once

#include "pmc/analysis/balancing.hpp"
#include "pmc/analysis/defect.hpp"
#include "pmc/analysis/operator.hpp"
#include "pmc/analysis/projected.hpp"
#include "pmc/analysis/projection.hpp"
#include "pmc/analysis/weight.hpp"
