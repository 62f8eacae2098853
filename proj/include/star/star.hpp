#pragma once

#include "star/checkpoint.hpp"
#include "star/cir_io.hpp"
#include "star/config.hpp"
#include "star/errors.hpp"
#include "star/metrics.hpp"
#include "star/model.hpp"
#include "star/numerics.hpp"
#include "star/solvers.hpp"
#include "star/synth.hpp"
#include "star/training.hpp"
