#pragma once

#include "fslln/errors.hpp"
#include "fslln/random.hpp"
#include "fslln/covariance_models.hpp"
#include "fslln/hermite_weights.hpp"
#include "fslln/field_synthesis.hpp"
#include "fslln/functional_estimator.hpp"
#include "fslln/slln_conditions.hpp"
#include "fslln/statistics.hpp"
#include "fslln/experiment_harness.hpp"
#include "fslln/config.hpp"
#include "fslln/output.hpp"
