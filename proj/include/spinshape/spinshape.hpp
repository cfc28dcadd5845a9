#pragma once

#include "spinshape/analytic.hpp"
#include "spinshape/banded.hpp"
#include "spinshape/discretize.hpp"
#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"
#include "spinshape/grid.hpp"
#include "spinshape/hypergeometric.hpp"
#include "spinshape/ladder.hpp"
#include "spinshape/spin.hpp"
#include "spinshape/symmetry.hpp"
#include "spinshape/zeromode.hpp"
