// Umbrella header.

#ifndef ISOCHRON_ISOCHRON_HPP
#define ISOCHRON_ISOCHRON_HPP

#include "cohomology.hpp"
#include "composition.hpp"
#include "error.hpp"
#include "fft.hpp"
#include "fourier_taylor.hpp"
#include "io.hpp"
#include "models.hpp"
#include "ode.hpp"
#include "parallel.hpp"
#include "periodic.hpp"
#include "solver.hpp"

#endif
