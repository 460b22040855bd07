#pragma once

// Umbrella header. config_io.hpp is not included here because it pulls in
// nlohmann/json; include it explicitly where JSON configs are read.

#include "bessel.hpp"
#include "channel.hpp"
#include "channel_dump.hpp"
#include "core.hpp"
#include "harness.hpp"
#include "maxmin.hpp"
#include "parallel.hpp"
#include "precoding.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "se.hpp"
#include "sinr.hpp"
#include "stats.hpp"
