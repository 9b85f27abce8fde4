#pragma once

#include "roadgp/consensus.hpp"
#include "roadgp/data.hpp"
#include "roadgp/dynamics.hpp"
#include "roadgp/ensemble.hpp"
#include "roadgp/errors.hpp"
#include "roadgp/features.hpp"
#include "roadgp/info_filter.hpp"
#include "roadgp/metrics.hpp"
#include "roadgp/robust.hpp"
#include "roadgp/scenario.hpp"
