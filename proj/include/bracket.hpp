#pragma once

#include "bracket/error.hpp"
#include "bracket/quadrature.hpp"
#include "bracket/states.hpp"
#include "bracket/photostat.hpp"
#include "bracket/splitter.hpp"
#include "bracket/rng.hpp"
#include "bracket/simshot.hpp"
#include "bracket/fringe.hpp"
#include "bracket/discrim.hpp"
#include "bracket/io.hpp"
