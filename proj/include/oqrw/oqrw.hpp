#pragma once

#include "oqrw/errors.hpp"
#include "oqrw/numerics.hpp"
#include "oqrw/rng.hpp"
#include "oqrw/walkmodel.hpp"
#include "oqrw/superops.hpp"
#include "oqrw/algebra.hpp"
#include "oqrw/structure.hpp"
#include "oqrw/asymptotics.hpp"
#include "oqrw/trajectories.hpp"
#include "oqrw/report.hpp"
