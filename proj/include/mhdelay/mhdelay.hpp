#pragma once

#include "core.hpp"
#include "traffic.hpp"
#include "channel.hpp"
#include "tandem.hpp"
#include "martingale.hpp"
#include "bounds.hpp"
#include "solver.hpp"
#include "provision.hpp"
#include "montecarlo.hpp"
#include "config.hpp"
#include "io.hpp"
