#pragma once

#include "mshare/core_state.hpp"
#include "mshare/dynamics.hpp"
#include "mshare/engine.hpp"
#include "mshare/error.hpp"
#include "mshare/measures.hpp"
#include "mshare/oracle.hpp"
#include "mshare/parameters.hpp"
#include "mshare/policy.hpp"
#include "mshare/rng.hpp"
#include "mshare/selection.hpp"
#include "mshare/summary.hpp"
