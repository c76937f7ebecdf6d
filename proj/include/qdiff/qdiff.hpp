#pragma once

#include "qdiff/analysis.hpp"
#include "qdiff/config.hpp"
#include "qdiff/csv.hpp"
#include "qdiff/density_matrix.hpp"
#include "qdiff/ensemble.hpp"
#include "qdiff/error.hpp"
#include "qdiff/evolution.hpp"
#include "qdiff/lattice.hpp"
#include "qdiff/observables.hpp"
#include "qdiff/plot.hpp"
#include "qdiff/presets.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/version.hpp"
