#pragma once

#include "instrank/error.hpp"
#include "instrank/evalrank.hpp"
#include "instrank/forecast.hpp"
#include "instrank/ingest.hpp"
#include "instrank/netrank.hpp"
#include "instrank/paperfilter.hpp"
#include "instrank/relscore.hpp"
