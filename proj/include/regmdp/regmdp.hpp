#pragma once

#include "regmdp/data.hpp"
#include "regmdp/environments.hpp"
#include "regmdp/errors.hpp"
#include "regmdp/estimation.hpp"
#include "regmdp/evaluation.hpp"
#include "regmdp/harness.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/planning.hpp"
#include "regmdp/properties.hpp"
#include "regmdp/regularizers.hpp"
