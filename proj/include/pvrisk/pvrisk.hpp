#ifndef PVRISK_PVRISK_HPP
#define PVRISK_PVRISK_HPP

// Umbrella header: numerical toolkit for robust risk-sensitive control of a
// photovoltaic-battery system under a bounded cloud-cover diffusion.

#include "pvrisk/battery.hpp"
#include "pvrisk/cir.hpp"
#include "pvrisk/cloud.hpp"
#include "pvrisk/config.hpp"
#include "pvrisk/errors.hpp"
#include "pvrisk/fields_io.hpp"
#include "pvrisk/grid.hpp"
#include "pvrisk/hjb.hpp"
#include "pvrisk/io.hpp"
#include "pvrisk/irradiance.hpp"
#include "pvrisk/montecarlo.hpp"
#include "pvrisk/orlicz.hpp"
#include "pvrisk/problem.hpp"
#include "pvrisk/quadrature.hpp"
#include "pvrisk/simplex.hpp"

#endif
