#pragma once

#include "strikespan/american.hpp"
#include "strikespan/barrier.hpp"
#include "strikespan/catalog.hpp"
#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/hedge.hpp"
#include "strikespan/io.hpp"
#include "strikespan/payoff.hpp"
#include "strikespan/pricer.hpp"
#include "strikespan/quadrature.hpp"
#include "strikespan/sampling.hpp"
