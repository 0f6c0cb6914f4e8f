#pragma once

#include "taboo/chain.hpp"
#include "taboo/green.hpp"
#include "taboo/hitting.hpp"
#include "taboo/lattice.hpp"
#include "taboo/philox.hpp"
#include "taboo/reduction.hpp"
#include "taboo/simulate.hpp"
#include "taboo/solve.hpp"
#include "taboo/value_iteration.hpp"
