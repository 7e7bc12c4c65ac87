#pragma once

#include "eegfwd/analytic.hpp"
#include "eegfwd/assembly.hpp"
#include "eegfwd/block_matrix.hpp"
#include "eegfwd/core.hpp"
#include "eegfwd/femcore.hpp"
#include "eegfwd/hexmesh.hpp"
#include "eegfwd/labelgrid.hpp"
#include "eegfwd/metrics.hpp"
#include "eegfwd/pipeline.hpp"
#include "eegfwd/run_config.hpp"
#include "eegfwd/solve.hpp"
#include "eegfwd/vtk_io.hpp"
