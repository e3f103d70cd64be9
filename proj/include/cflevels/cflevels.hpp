#pragma once

#include "cflevels/cache.hpp"
#include "cflevels/error.hpp"
#include "cflevels/evaluation.hpp"
#include "cflevels/ingest.hpp"
#include "cflevels/levels.hpp"
#include "cflevels/method.hpp"
#include "cflevels/parallel.hpp"
#include "cflevels/predictor.hpp"
#include "cflevels/ratings.hpp"
#include "cflevels/similarity.hpp"
