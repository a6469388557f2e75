#pragma once

// Umbrella header for the refflow library.

#include "refflow/charts.hpp"
#include "refflow/error.hpp"
#include "refflow/fields.hpp"
#include "refflow/flow.hpp"
#include "refflow/io.hpp"
#include "refflow/laws.hpp"
#include "refflow/linalg.hpp"
#include "refflow/refgrad.hpp"
#include "refflow/scenario.hpp"
