#pragma once

#include "core.hpp"
#include "trajectory.hpp"
#include "ansatz.hpp"
#include "equilibria.hpp"
#include "flow.hpp"
#include "series.hpp"
#include "closed_form.hpp"
#include "diagnostics.hpp"
#include "verify.hpp"
#include "io.hpp"
