#ifndef VESAR_VESAR_HPP
#define VESAR_VESAR_HPP

#include "vesar/config.hpp"
#include "vesar/error.hpp"
#include "vesar/estimands.hpp"
#include "vesar/infer.hpp"
#include "vesar/observe.hpp"
#include "vesar/rng.hpp"
#include "vesar/runner.hpp"
#include "vesar/simcore.hpp"
#include "vesar/stats.hpp"
#include "vesar/sweep.hpp"
#include "vesar/validation.hpp"

#endif
