#pragma once

#include "recomb/chain.hpp"
#include "recomb/error.hpp"
#include "recomb/measure.hpp"
#include "recomb/montecarlo.hpp"
#include "recomb/partition.hpp"
#include "recomb/quasistationary.hpp"
#include "recomb/random.hpp"
#include "recomb/scalar.hpp"
#include "recomb/verify.hpp"
#include "recomb/weights.hpp"
