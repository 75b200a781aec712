#pragma once

// Umbrella header for the generative-mixture boosting toolkit.

#include "adagan/boosting.hpp"
#include "adagan/discriminator.hpp"
#include "adagan/distribution.hpp"
#include "adagan/divergence.hpp"
#include "adagan/em.hpp"
#include "adagan/experiment.hpp"
#include "adagan/generator.hpp"
#include "adagan/kde.hpp"
#include "adagan/metrics.hpp"
#include "adagan/mixture.hpp"
#include "adagan/optimal_target.hpp"
#include "adagan/rng.hpp"
#include "adagan/sample.hpp"
#include "adagan/toy_data.hpp"
#include "adagan/verify.hpp"
#include "adagan/weights.hpp"
