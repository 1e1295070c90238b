#pragma once

#include "zplcav/analysis.hpp"
#include "zplcav/cavity.hpp"
#include "zplcav/config.hpp"
#include "zplcav/dbr.hpp"
#include "zplcav/dipole.hpp"
#include "zplcav/errors.hpp"
#include "zplcav/inhomogeneous.hpp"
#include "zplcav/io.hpp"
#include "zplcav/least_squares.hpp"
#include "zplcav/peak_fit.hpp"
#include "zplcav/purcell.hpp"
#include "zplcav/quadrature.hpp"
#include "zplcav/reproduce.hpp"
#include "zplcav/scenario.hpp"
#include "zplcav/spectrum.hpp"
