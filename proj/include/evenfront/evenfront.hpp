#pragma once

#include "builtin.hpp"
#include "driver.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "problem.hpp"
#include "solver.hpp"
