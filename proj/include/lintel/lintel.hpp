#pragma once

#include "lintel/errors.hpp"
#include "lintel/expm.hpp"
#include "lintel/fusion.hpp"
#include "lintel/gaussian.hpp"
#include "lintel/harness/experiment.hpp"
#include "lintel/harness/metrics.hpp"
#include "lintel/harness/records.hpp"
#include "lintel/harness/synth.hpp"
#include "lintel/harness/timeseries.hpp"
#include "lintel/hyperopt.hpp"
#include "lintel/kernel_gp.hpp"
#include "lintel/kernels.hpp"
#include "lintel/markov_gp.hpp"
#include "lintel/nelder_mead.hpp"
#include "lintel/random.hpp"
#include "lintel/state_space.hpp"
#include "lintel/streaming.hpp"
