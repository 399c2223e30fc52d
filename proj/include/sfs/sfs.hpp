#pragma once

#include "bounds.hpp"
#include "cmim.hpp"
#include "dataset.hpp"
#include "engine.hpp"
#include "harness.hpp"
#include "lasso.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "score_model.hpp"
#include "selector.hpp"
#include "synth.hpp"
