#pragma once

#include "core.hpp"
#include "link.hpp"
#include "scalar_loss.hpp"
#include "composite.hpp"
#include "multiclass.hpp"
#include "validity.hpp"
#include "recipes.hpp"
#include "curves.hpp"
#include "experiments.hpp"
#include "config.hpp"
