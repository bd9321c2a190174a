#pragma once

#include "sera/commands.hpp"
#include "sera/cutoff.hpp"
#include "sera/hermite.hpp"
#include "sera/io.hpp"
#include "sera/kernels.hpp"
#include "sera/operator.hpp"
#include "sera/quadrature.hpp"
#include "sera/recovery.hpp"
#include "sera/synthesis.hpp"
