#pragma once

#include "pmc/analysis.hpp"
#include "pmc/assembly.hpp"
#include "pmc/error.hpp"
#include "pmc/expr.hpp"
#include "pmc/green.hpp"
#include "pmc/mesh.hpp"
#include "pmc/moments.hpp"
#include "pmc/numerics.hpp"
#include "pmc/pmc_function.hpp"
#include "pmc/profile.hpp"
