#pragma once

#include "overpen/adaptive.hpp"
#include "overpen/criteria.hpp"
#include "overpen/densities.hpp"
#include "overpen/experiments.hpp"
#include "overpen/histogram.hpp"
#include "overpen/io.hpp"
#include "overpen/proxies.hpp"
#include "overpen/quadrature.hpp"
#include "overpen/random.hpp"
#include "overpen/selection.hpp"
#include "overpen/verify.hpp"
