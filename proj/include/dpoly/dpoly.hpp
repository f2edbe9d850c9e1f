#pragma once

#include "dpoly/entropy_lab.hpp"
#include "dpoly/errors.hpp"
#include "dpoly/fit.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/heat_kernel.hpp"
#include "dpoly/interchange.hpp"
#include "dpoly/lsi.hpp"
#include "dpoly/numeric.hpp"
#include "dpoly/parallel.hpp"
#include "dpoly/particle_law.hpp"
#include "dpoly/path.hpp"
#include "dpoly/rng.hpp"
#include "dpoly/simulate.hpp"
#include "dpoly/spectral.hpp"
#include "dpoly/state_space.hpp"
#include "dpoly/stats.hpp"
#include "dpoly/version.hpp"
#include "dpoly/wilson.hpp"
#include "dpoly/wilson_checks.hpp"
