#pragma once

// Umbrella header for the echo-canceler control laboratory.

#include "eclab/ar1.hpp"
#include "eclab/bivariate_gamma.hpp"
#include "eclab/channel.hpp"
#include "eclab/classifier.hpp"
#include "eclab/config.hpp"
#include "eclab/control.hpp"
#include "eclab/covariance.hpp"
#include "eclab/csv.hpp"
#include "eclab/error_probability.hpp"
#include "eclab/errors.hpp"
#include "eclab/experiment.hpp"
#include "eclab/hypothesis.hpp"
#include "eclab/nlms.hpp"
#include "eclab/parallel.hpp"
#include "eclab/quadrature.hpp"
#include "eclab/rng.hpp"
#include "eclab/scenario.hpp"
#include "eclab/special_functions.hpp"
