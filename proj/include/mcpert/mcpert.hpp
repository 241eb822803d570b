#pragma once

#include "mcpert/bounds.hpp"
#include "mcpert/core.hpp"
#include "mcpert/error.hpp"
#include "mcpert/experiments.hpp"
#include "mcpert/models.hpp"
#include "mcpert/rng.hpp"
#include "mcpert/stationary.hpp"
