#pragma once

#include "marketnet/causality.hpp"
#include "marketnet/error.hpp"
#include "marketnet/features.hpp"
#include "marketnet/graph.hpp"
#include "marketnet/ingest.hpp"
#include "marketnet/metrics.hpp"
#include "marketnet/models.hpp"
#include "marketnet/parallel.hpp"
#include "marketnet/returns.hpp"
#include "marketnet/rng.hpp"
#include "marketnet/scoring.hpp"
#include "marketnet/stats.hpp"
