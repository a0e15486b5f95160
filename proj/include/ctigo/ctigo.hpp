/// \file ctigo.hpp
/// Umbrella header for the whole library.
#pragma once

#include "ctigo/cholesky.hpp"
#include "ctigo/dense.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/factorize.hpp"
#include "ctigo/givens.hpp"
#include "ctigo/gmrf.hpp"
#include "ctigo/io.hpp"
#include "ctigo/metrics.hpp"
#include "ctigo/sampling.hpp"
#include "ctigo/sparse.hpp"
