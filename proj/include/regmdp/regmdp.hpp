#pragma once

#include "regmdp/analysis.hpp"
#include "regmdp/bounding.hpp"
#include "regmdp/environments.hpp"
#include "regmdp/experiment.hpp"
#include "regmdp/io.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/rng.hpp"
#include "regmdp/soft_ops.hpp"
#include "regmdp/solvers.hpp"
#include "regmdp/version.hpp"
