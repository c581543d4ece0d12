#pragma once

#include "osc/error.hpp"
#include "osc/random.hpp"
#include "osc/owl.hpp"
#include "osc/solvers.hpp"
#include "osc/geometry.hpp"
#include "osc/rgg.hpp"
#include "osc/spectral.hpp"
#include "osc/parallel.hpp"
#include "osc/metrics.hpp"
#include "osc/pipeline.hpp"
#include "osc/csv.hpp"
#include "osc/matrix_io.hpp"
#include "osc/experiments.hpp"
#include "osc/params.hpp"
#include "osc/properties.hpp"
