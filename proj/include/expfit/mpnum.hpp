#pragma once

#include "expfit/error.hpp"
#include "expfit/mpnum/complex.hpp"
#include "expfit/mpnum/expm.hpp"
#include "expfit/mpnum/linalg.hpp"
#include "expfit/mpnum/matrix.hpp"
#include "expfit/mpnum/poly.hpp"
#include "expfit/mpnum/quad.hpp"
#include "expfit/mpnum/real.hpp"
