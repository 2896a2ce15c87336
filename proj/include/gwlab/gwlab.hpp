#pragma once

#include "gwlab/numeric.hpp"
#include "gwlab/errors.hpp"
#include "gwlab/rng.hpp"
#include "gwlab/families.hpp"
#include "gwlab/model.hpp"
#include "gwlab/config.hpp"
#include "gwlab/constants.hpp"
#include "gwlab/pgf.hpp"
#include "gwlab/wtransform.hpp"
#include "gwlab/montecarlo.hpp"
#include "gwlab/experiments.hpp"
#include "gwlab/runner.hpp"
