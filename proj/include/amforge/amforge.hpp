#pragma once

#include "amforge/error.hpp"
#include "amforge/utf8.hpp"
#include "amforge/rng.hpp"
#include "amforge/parallel.hpp"
#include "amforge/ethiopic.hpp"
#include "amforge/record.hpp"
#include "amforge/ingest.hpp"
#include "amforge/template.hpp"
#include "amforge/corrupt.hpp"
#include "amforge/forge.hpp"
#include "amforge/metrics.hpp"
#include "amforge/eval.hpp"
#include "amforge/review.hpp"
#include "amforge/config.hpp"
#include "amforge/commands.hpp"
