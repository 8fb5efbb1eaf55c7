#pragma once

#include "crsobolev/cayley.hpp"
#include "crsobolev/errors.hpp"
#include "crsobolev/estimators.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/heisenberg.hpp"
#include "crsobolev/lab/constants.hpp"
#include "crsobolev/lab/constraints.hpp"
#include "crsobolev/lab/params.hpp"
#include "crsobolev/lab/perturbation.hpp"
#include "crsobolev/lab/scalar.hpp"
#include "crsobolev/local_poincare.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/optimizer.hpp"
#include "crsobolev/quadrature.hpp"
#include "crsobolev/random.hpp"
#include "crsobolev/report.hpp"
#include "crsobolev/sphere.hpp"
