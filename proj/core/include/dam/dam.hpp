#pragma once

// Umbrella header.
#include "dam/dynamics.hpp"
#include "dam/exp_sum.hpp"
#include "dam/experiments.hpp"
#include "dam/pattern.hpp"
#include "dam/pattern_io.hpp"
#include "dam/results_csv.hpp"
#include "dam/seed.hpp"
#include "dam/signed_log.hpp"
#include "dam/stats.hpp"
#include "dam/theory.hpp"
