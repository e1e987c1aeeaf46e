#pragma once

// Umbrella header for the whole library.

#include "pmt/config.hpp"
#include "pmt/default_species.hpp"
#include "pmt/error.hpp"
#include "pmt/evaluation.hpp"
#include "pmt/experiment.hpp"
#include "pmt/fft.hpp"
#include "pmt/forward.hpp"
#include "pmt/grid.hpp"
#include "pmt/imaging.hpp"
#include "pmt/io.hpp"
#include "pmt/matcher.hpp"
#include "pmt/merge.hpp"
#include "pmt/parallel.hpp"
#include "pmt/series.hpp"
#include "pmt/species.hpp"
#include "pmt/species_fit.hpp"
#include "pmt/structure.hpp"
#include "pmt/template.hpp"
