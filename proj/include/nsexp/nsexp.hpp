#pragma once

#include "nsexp/analysis.hpp"
#include "nsexp/error.hpp"
#include "nsexp/expansion.hpp"
#include "nsexp/galerkin.hpp"
#include "nsexp/operators.hpp"
#include "nsexp/polynomial.hpp"
#include "nsexp/spectral_field.hpp"
#include "nsexp/wave_vector.hpp"
